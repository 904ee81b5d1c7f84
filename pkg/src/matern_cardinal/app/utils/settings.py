"""Run settings: declarative config files, flag overrides and RunConfig."""

import configparser
import json
import os
from dataclasses import dataclass, asdict
from fractions import Fraction
from pathlib import Path

from ..core.errors import UsageError
from .logger import get_logger

log = get_logger("settings")

THREADS_ENV = "MATERN_CARDINAL_THREADS"


class Settings:
    """Layered run settings (defaults updated by a config file)."""

    DEFAULT_SETTINGS = {
        "kernel": {
            "id": "matern:m=2,d=2",
        },
        "grid": {
            "size": 64,
            "max_size": 512,
            "route": "auto",
            "spatial_cap": 4096,
            "poisson_cap": 512,
        },
        "tolerances": {
            "symbol_tol": 1e-11,
            "coeff_tol": 1e-12,
            "eval_tol": 1e-10,
            "cardinal_tol": 1e-8,
            "fourier_tol": 1e-6,
        },
        "sampling": {
            "lebesgue_samples": 33,
            "refine_rounds": 3,
            "error_offsets": 7,
            "decay_radius": 24,
            "profile_radius": 8.0,
            "profile_points": 161,
            "synthesis_delta": 0.5,
            "synthesis_terms": 8,
        },
        "study": {
            "h_list": "1..1/32",
            "test_function": "gaussian",
            "eval_radius": 3.0,
            "lebesgue_ratio_max": 2.0,
            "lebesgue_max": 10.0,
            "decay_b_min": 0.2,
            "decay_a_ratio_max": 10.0,
        },
        "output": {
            "directory": "results",
        },
        "run": {
            "threads": 1,
        },
    }

    def __init__(self, config_path: Path | str | None = None):
        self._settings = self._deep_copy(self.DEFAULT_SETTINGS)
        self._config_path = Path(config_path) if config_path else None
        if self._config_path is not None:
            self.load()

    def _deep_copy(self, obj):
        """Deep copy a nested dict/list structure."""
        if isinstance(obj, dict):
            return {k: self._deep_copy(v) for k, v in obj.items()}
        elif isinstance(obj, list):
            return [self._deep_copy(i) for i in obj]
        return obj

    def load(self):
        """Load settings from an INI-style or JSON config file."""
        path = self._config_path
        if not path.exists():
            raise UsageError(f"Config file not found: {path}")

        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json":
            try:
                saved = json.loads(text)
            except json.JSONDecodeError as e:
                raise UsageError(f"Invalid JSON config {path}: {e}") from e
        else:
            saved = self._parse_key_values(text, path)

        self._deep_update(self._settings, self._coerce(saved))
        log.info(f"Loaded config: {path}")

    def _parse_key_values(self, text: str, path: Path) -> dict:
        """Parse flat key=value text with [section] headers."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as e:
            raise UsageError(f"Invalid config {path}: {e}") from e
        return {section: dict(parser.items(section)) for section in parser.sections()}

    def _coerce(self, saved: dict) -> dict:
        """Check keys against the defaults and convert values to their types."""
        result = {}
        for section, values in saved.items():
            if section not in self.DEFAULT_SETTINGS or not isinstance(values, dict):
                raise UsageError(f"Unknown config section: [{section}]")
            defaults = self.DEFAULT_SETTINGS[section]
            result[section] = {}
            for key, value in values.items():
                if key not in defaults:
                    raise UsageError(f"Unknown config key: {section}.{key}")
                result[section][key] = _coerce_value(defaults[key], value, f"{section}.{key}")
        return result

    def _deep_update(self, base: dict, update: dict):
        """Recursively update nested dictionaries."""
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_update(base[key], value)
            else:
                base[key] = value

    def get(self, category: str, key: str, default=None):
        """Get a setting value."""
        return self._settings.get(category, {}).get(key, default)

    def get_category(self, category: str) -> dict:
        """Get all settings in a category."""
        return self._settings.get(category, {}).copy()

    @property
    def config_path(self) -> Path | None:
        return self._config_path


def _coerce_value(default, value, name: str):
    """Convert a raw config value to the type of its default."""
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError) as e:
        raise UsageError(f"Invalid value for {name}: {value!r}") from e
    return str(value).strip()


def parse_h_list(text: str) -> tuple[float, ...]:
    """Parse a list of scales.

    Accepts comma separated values, fractions like ``1/32`` and dyadic
    ranges ``1..1/32`` (halving from the first to the last value).
    """
    values = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                start_text, stop_text = part.split("..", 1)
                start = Fraction(start_text.strip())
                stop = Fraction(stop_text.strip())
                if start <= 0 or stop <= 0 or stop > start:
                    raise ValueError(part)
                h = start
                while h >= stop:
                    values.append(float(h))
                    h /= 2
            else:
                values.append(float(Fraction(part)))
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"Invalid h value: {part!r}") from e
    if not values:
        raise UsageError("Empty h list")
    for h in values:
        if h < 0 or h > 1:
            raise UsageError(f"h must lie in [0, 1], got {h}")
    return tuple(values)


def threads_from_env(default: int = 1) -> int:
    """Read the thread count fallback from the environment."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        threads = int(raw)
    except ValueError as e:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
    return max(1, threads)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one CLI run."""
    kernel_id: str
    h_list: tuple[float, ...]
    grid_size: int = 64
    max_grid: int = 512
    route: str = "auto"
    spatial_cap: int = 4096
    poisson_cap: int = 512
    symbol_tol: float = 1e-11
    coeff_tol: float = 1e-12
    eval_tol: float = 1e-10
    cardinal_tol: float = 1e-8
    fourier_tol: float = 1e-6
    lebesgue_samples: int = 33
    refine_rounds: int = 3
    error_offsets: int = 7
    decay_radius: int = 24
    profile_radius: float = 8.0
    profile_points: int = 161
    synthesis_delta: float = 0.5
    synthesis_terms: int = 8
    test_function: str = "gaussian"
    eval_radius: float = 3.0
    lebesgue_ratio_max: float = 2.0
    lebesgue_max: float = 10.0
    decay_b_min: float = 0.2
    decay_a_ratio_max: float = 10.0
    output_dir: str = "results"
    threads: int = 1

    @classmethod
    def resolve(cls, settings: Settings, overrides: dict | None = None) -> "RunConfig":
        """Build a RunConfig from settings, then flags, then the environment."""
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

        grid = settings.get_category("grid")
        tols = settings.get_category("tolerances")
        sampling = settings.get_category("sampling")
        study = settings.get_category("study")

        h_text = overrides.pop("h", study["h_list"])
        tol = overrides.pop("tol", None)

        threads = overrides.pop("threads", None)
        if threads is None:
            threads = threads_from_env(settings.get("run", "threads", 1))

        values = dict(
            kernel_id=overrides.pop("kernel", settings.get("kernel", "id")),
            h_list=parse_h_list(h_text),
            grid_size=overrides.pop("grid", grid["size"]),
            max_grid=grid["max_size"],
            route=grid["route"],
            spatial_cap=grid["spatial_cap"],
            poisson_cap=grid["poisson_cap"],
            symbol_tol=tols["symbol_tol"],
            coeff_tol=tols["coeff_tol"],
            eval_tol=tol if tol is not None else tols["eval_tol"],
            cardinal_tol=tols["cardinal_tol"],
            fourier_tol=tols["fourier_tol"],
            lebesgue_samples=sampling["lebesgue_samples"],
            refine_rounds=sampling["refine_rounds"],
            error_offsets=sampling["error_offsets"],
            decay_radius=sampling["decay_radius"],
            profile_radius=sampling["profile_radius"],
            profile_points=sampling["profile_points"],
            synthesis_delta=sampling["synthesis_delta"],
            synthesis_terms=sampling["synthesis_terms"],
            test_function=study["test_function"],
            eval_radius=study["eval_radius"],
            lebesgue_ratio_max=study["lebesgue_ratio_max"],
            lebesgue_max=study["lebesgue_max"],
            decay_b_min=study["decay_b_min"],
            decay_a_ratio_max=study["decay_a_ratio_max"],
            output_dir=str(overrides.pop("out", settings.get("output", "directory"))),
            threads=int(threads),
        )
        if overrides:
            raise UsageError(f"Unknown overrides: {sorted(overrides)}")

        config = cls(**values)
        config.validate()
        return config

    def validate(self):
        """Reject inconsistent values early."""
        if self.grid_size < 4 or self.grid_size % 2:
            raise UsageError(f"--grid must be an even integer >= 4, got {self.grid_size}")
        if self.max_grid < self.grid_size:
            raise UsageError("grid.max_size must not be smaller than grid.size")
        if self.route not in ("auto", "spatial", "poisson"):
            raise UsageError(f"grid.route must be auto, spatial or poisson, got {self.route!r}")
        for name in ("symbol_tol", "coeff_tol", "eval_tol", "cardinal_tol", "fourier_tol"):
            if not 0 < getattr(self, name) < 1:
                raise UsageError(f"{name} must lie in (0, 1)")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if not 0 < self.synthesis_delta < 3.141592653589793:
            raise UsageError("sampling.synthesis_delta must lie in (0, pi)")

    def spec(self):
        """The KernelSpec named by kernel_id."""
        from ..kernels.kernels import parse_kernel_id
        return parse_kernel_id(self.kernel_id)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["h_list"] = list(self.h_list)
        return data

"""Convergence experiments for I_h with Matern and compactly supported kernels."""

import dataclasses
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from ..cardinal.lagrange import (
    LagrangeFunction, default_floor, fit_decay, lagrange_function,
)
from ..cardinal.symbol import Route, spatial_radius
from ..core import constants as C
from ..core.errors import (
    CorruptedGridError, DomainError, IllPosedInterpolationError, InsufficientDataError,
)
from ..kernels.kernels import KernelSpec
from ..utils.file_io import report_filename
from ..utils.logger import LoggerMixin
from .interpolation import (
    DataWindow, TestFunction, WindowConfig, error_offsets, interpolate_offsets,
)
from .lebesgue import SamplingConfig, lebesgue_constant, resolve_halo
from .sweep import map_ordered

CSV_COLUMNS = (
    "h", "error", "uncertainty", "ratio", "lebesgue", "lebesgue_uncertainty",
    "decay_A", "decay_A_uncertainty", "decay_B", "decay_B_uncertainty", "halo", "grid_size",
    "radius", "cardinal_residual",
)


@dataclass
class ExperimentReport:
    """Self-describing result of a study: per-h rows, fitted slope and parameters."""
    study: str
    kernel_id: str
    file_stem: str
    d: int
    m: int
    test_function: str
    h_list: list[float]
    rows: list[dict] = field(default_factory=list)
    slope: float = math.nan
    slope_defined: bool = False
    fitted_points: int = 0
    parameters: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def errors(self) -> list[float]:
        return [row["error"] for row in self.rows]

    def csv_header(self) -> list[str]:
        return list(CSV_COLUMNS)

    def csv_rows(self):
        for row in self.rows:
            yield [row.get(column, math.nan) for column in CSV_COLUMNS]

    def filename(self, extension: str) -> str:
        return report_filename(self.file_stem, self.d, self.m, self.study, extension)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def fit_slope(h_list, errors, floor: float) -> tuple[float, int, list[float]]:
    """Least-squares slope of log(error) against log(h) above the floor.

    Returns:
        (slope or nan, points used, dropped h values)
    """
    h = np.asarray(h_list, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = np.isfinite(e) & (e > floor)
    dropped = [float(v) for v in h[~keep]]
    if np.count_nonzero(keep) < 2:
        return math.nan, int(np.count_nonzero(keep)), dropped
    slope, _ = np.polyfit(np.log(h[keep]), np.log(e[keep]), 1)
    return float(slope), int(np.count_nonzero(keep)), dropped


def _evaluate_at_scale(L: LagrangeFunction, f: TestFunction, window_cfg: WindowConfig,
                       sampling_cfg: SamplingConfig) -> dict:
    """One row of a study: sup error over the central window and the Lebesgue constant."""
    d, h = L.d, L.h
    try:
        fit = fit_decay(L, floor=None)
    except InsufficientDataError:
        fit = None
    W, tail = resolve_halo(L, window_cfg.eval_tol, fit)

    data = DataWindow.sample(f, h, np.zeros(d), window_cfg.eval_radius, W)
    xs, values = interpolate_offsets(L, data, error_offsets(window_cfg.error_offsets, d))
    exact = f(xs if d > 1 else xs[..., 0])
    error = float(np.max(np.abs(exact - values)))
    f_sup = float(np.max(np.abs(data.values)))
    uncertainty = tail * f_sup + default_floor(L) * f_sup

    lebesgue = lebesgue_constant(L, dataclasses.replace(sampling_cfg, halo=W), fit)
    return {
        "h": h,
        "error": error,
        "uncertainty": uncertainty,
        "f_sup": f_sup,
        "lebesgue": lebesgue.value,
        "lebesgue_uncertainty": lebesgue.uncertainty,
        "decay_A": fit.amplitude if fit else math.nan,
        "decay_A_uncertainty": fit.amplitude_uncertainty if fit else math.nan,
        "decay_B": fit.rate if fit else math.nan,
        "decay_B_uncertainty": fit.rate_uncertainty if fit else math.nan,
        "finite_support": bool(fit.finite_support) if fit else False,
        "halo": W,
        "grid_size": L.grid_size,
        "radius": L.radius,
        "cardinal_residual": L.cardinal_residual,
        "route": L.route.value,
    }


class StudyRunner(LoggerMixin):
    """Runs a study over h_list; each h is an independent task."""

    def __init__(self, spec: KernelSpec, f: TestFunction, window_cfg: WindowConfig | None = None,
                 sampling_cfg: SamplingConfig | None = None,
                 build: Callable[[KernelSpec, float], LagrangeFunction] | None = None,
                 threads: int = 1):
        self.spec = spec
        self.f = f
        self.window_cfg = window_cfg or WindowConfig()
        self.sampling_cfg = sampling_cfg or SamplingConfig(tol=self.window_cfg.eval_tol)
        self.build = build or lagrange_function
        self.threads = threads

    def _row(self, h: float) -> dict:
        L = self.build(self.spec, h)
        row = _evaluate_at_scale(L, self.f, self.window_cfg, self.sampling_cfg)
        self.log.info(f"{self.spec.kernel_id} h={h:g}: error={row['error']:.3e}, "
                      f"Lambda={row['lebesgue']:.6f}, W={row['halo']}")
        return row

    def run(self, study: str, h_list) -> ExperimentReport:
        h_list = [float(h) for h in h_list]
        if any(not 0 < h <= 1 for h in h_list):
            raise DomainError(f"Study scales must lie in (0, 1], got {h_list}")
        if any(b >= a for a, b in zip(h_list, h_list[1:])):
            raise DomainError("Study scales must be strictly decreasing")

        rows = map_ordered(self._row, h_list, self.threads)
        for previous, row in zip([None] + rows, rows):
            row["ratio"] = previous["error"] / row["error"] if previous and row["error"] > 0 else math.nan

        f_sup = max(row["f_sup"] for row in rows)
        floor = max(C.ERROR_FLOOR_FACTOR * C.EPS * f_sup, 10.0 * max(row["uncertainty"] for row in rows))
        slope, used, dropped = fit_slope(h_list, [row["error"] for row in rows], floor)

        report = ExperimentReport(
            study=study,
            kernel_id=self.spec.kernel_id,
            file_stem=self.spec.file_stem,
            d=self.spec.d,
            m=self.spec.m,
            test_function=self.f.name,
            h_list=h_list,
            rows=rows,
            slope=slope,
            slope_defined=not math.isnan(slope),
            fitted_points=used,
            parameters={
                "window": dataclasses.asdict(self.window_cfg),
                "sampling": dataclasses.asdict(self.sampling_cfg),
                "error_floor": floor,
                "test_function_admissible": self.f.admissible,
                "test_function_certificate": self.f.certificate,
            },
        )
        if dropped:
            note = f"errors at h={dropped} are at the floating-point floor {floor:.1e} and were left out of the slope"
            report.notes.append(note)
            self.log.warning(note)
        if not report.slope_defined:
            report.notes.append("slope undefined: fewer than two errors above the floor")
            self.log.warning(f"{self.spec.kernel_id}: convergence slope undefined")
        self.log.info(f"{study} {self.spec.kernel_id}: slope={slope:.4f} over {used} scales")
        return report


def convergence_study(spec: KernelSpec, f: TestFunction, h_list, window_cfg: WindowConfig | None = None,
                      sampling_cfg: SamplingConfig | None = None, build=None,
                      threads: int = 1) -> ExperimentReport:
    """sup |f - I_h f| over the central window for each h and the fitted rate."""
    return StudyRunner(spec, f, window_cfg, sampling_cfg, build, threads).run("converge", h_list)


def _compact_build(spec: KernelSpec, h: float, **kwargs) -> LagrangeFunction:
    try:
        return lagrange_function(spec, h, route=Route.SPATIAL, **kwargs)
    except CorruptedGridError as exc:
        raise IllPosedInterpolationError(
            f"{spec.kernel_id} at h={h:g}: cardinal symbol is not positive ({exc})"
        ) from exc


def compact_kernel_study(spec: KernelSpec, f: TestFunction, h_list, window_cfg: WindowConfig | None = None,
                         sampling_cfg: SamplingConfig | None = None, threads: int = 1,
                         **build_options) -> ExperimentReport:
    """Interpolation with a compactly supported kernel; the error bounds the distance to the span.

    The symbol is always taken from the exact spatial sum over
    (2 ceil(support / h) + 1)^d lattice points.
    """
    if not spec.is_compact:
        raise DomainError(f"{spec.kernel_id} is not compactly supported")
    runner = StudyRunner(spec, f, window_cfg, sampling_cfg, partial(_compact_build, **build_options), threads)
    report = runner.run("compact", h_list)
    for row in report.rows:
        K, _ = spatial_radius(spec, row["h"], C.SYMBOL_TOL, C.SPATIAL_CAP)
        row["spatial_terms"] = (2 * K + 1) ** spec.d
    return report


@dataclass(frozen=True)
class ErrorBoundCheck:
    """error <= (1 + Lambda) dist + slack, dist from a least-squares member of the span."""
    error: float
    lebesgue: float
    distance: float
    slack: float

    @property
    def bound(self) -> float:
        return (1.0 + self.lebesgue) * self.distance + self.slack

    @property
    def holds(self) -> bool:
        return self.error <= self.bound


def span_distance(spec: KernelSpec, h: float, f: TestFunction, centers_radius: float,
                  points: np.ndarray) -> float:
    """max |f - s| at the points for the least-squares s = sum c_j Phi(. - hj), ||hj||_inf <= radius."""
    d = spec.d
    n = int(math.floor(centers_radius / h))
    axis = h * np.arange(-n, n + 1, dtype=float)
    centers = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=-1)
    points = points.reshape(-1, d)
    if points.shape[0] * centers.shape[0] > C.SPATIAL_CAP ** 2:
        raise DomainError(f"Least-squares problem with {points.shape[0]} x {centers.shape[0]} entries is too large")
    diff = points[:, None, :] - centers[None, :, :]
    A = spec.radial(np.sqrt(np.einsum("pcd,pcd->pc", diff, diff)))
    target = f(points if d > 1 else points[:, 0])
    coeffs, *_ = np.linalg.lstsq(A, target, rcond=1e-12)
    return float(np.max(np.abs(A @ coeffs - target)))


def error_bound_check(L: LagrangeFunction, f: TestFunction, window_cfg: WindowConfig | None = None,
                      sampling_cfg: SamplingConfig | None = None) -> ErrorBoundCheck:
    """Compare the interpolation error with (1 + Lambda(h)) times a distance to the span.

    The distance is measured on every point the interpolant reads data from
    and on the error offsets, so it bounds ||f - s|| where the inequality needs it.
    """
    cfg = window_cfg or WindowConfig()
    sampling_cfg = sampling_cfg or SamplingConfig(tol=cfg.eval_tol)
    row = _evaluate_at_scale(L, f, cfg, sampling_cfg)
    d, h, W = L.d, L.h, row["halo"]

    reach = cfg.eval_radius + (W + 1) * h
    n = int(math.ceil(reach / h))
    axis = h * np.arange(-n, n + 1, dtype=float)
    shifts = np.concatenate(([0.0], h * (2 * np.arange(cfg.error_offsets) + 1) / (2.0 * cfg.error_offsets)))
    line = np.unique((axis[:, None] + shifts[None, :]).ravel())
    points = np.stack([g.ravel() for g in np.meshgrid(*([line] * d), indexing="ij")], axis=-1)

    distance = span_distance(L.spec, h, f, reach, points)
    slack = row["uncertainty"] + row["lebesgue_uncertainty"] * row["f_sup"]
    return ErrorBoundCheck(row["error"], row["lebesgue"], distance, slack)

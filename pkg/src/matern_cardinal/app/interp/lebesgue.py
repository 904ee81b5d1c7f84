"""Lebesgue constant Lambda(h) = sup_y sum_j |chi~_h(y - j)| of the interpolation operator."""

from dataclasses import dataclass

import numpy as np

from ..cardinal.lagrange import DecayFit, LagrangeFunction, default_floor, fit_decay
from ..core import constants as C
from ..core.errors import DomainError, InsufficientDataError
from ..utils.logger import get_logger
from .interpolation import halo_width, truncation_bound

log = get_logger("lebesgue")


@dataclass(frozen=True)
class SamplingConfig:
    """Sample grid for the sup over the period cell.

    samples is the per-axis count on [0, 1]; by the symmetry of chi~ only
    [0, 1/2]^d is visited, with (samples + 1) // 2 points per axis.
    """
    samples: int = C.LEBESGUE_SAMPLES
    refine_rounds: int = C.LEBESGUE_REFINE_ROUNDS
    tol: float = C.EVAL_TOL
    halo: int | None = None

    def __post_init__(self):
        if self.samples < 2:
            raise DomainError(f"Need at least 2 samples per axis, got {self.samples}")
        if self.refine_rounds < 0:
            raise DomainError("refine_rounds must be >= 0")


@dataclass(frozen=True)
class LebesgueEstimate:
    value: float
    uncertainty: float
    maximizer: tuple[float, ...]
    h: float
    halo: int
    samples: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "uncertainty": self.uncertainty,
            "maximizer": list(self.maximizer),
            "h": self.h,
            "halo": self.halo,
            "samples": self.samples,
        }


def lebesgue_function(L: LagrangeFunction, y, W: int) -> float:
    """sum over ||n||_inf <= W of |chi~(y + n)|."""
    return float(np.sum(np.abs(L.lattice_values(y, W))))


def _grid(axis: np.ndarray, d: int) -> np.ndarray:
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def resolve_halo(L: LagrangeFunction, tol: float, fit: DecayFit | None = None) -> tuple[int, float]:
    """Halo W for accuracy tol and the bound on what it drops."""
    if fit is None:
        try:
            fit = fit_decay(L)
        except InsufficientDataError as exc:
            W = C.DECAY_FIT_RADIUS
            tail = default_floor(L) * ((2 * W + 3) ** L.d - (2 * W + 1) ** L.d)
            log.warning(f"Decay fit unavailable at h={L.h:g} ({exc}); using W={W}")
            return W, tail
    W = halo_width(fit, tol)
    tail = truncation_bound(fit, W, L.d)
    # the shell counts grow like W^(d-1), so widen until the whole tail fits
    while tail > tol and W < 4 * C.DECAY_FIT_RADIUS:
        W += 1
        tail = truncation_bound(fit, W, L.d)
    return W, tail


def lebesgue_constant(L: LagrangeFunction, sampling_cfg: SamplingConfig | None = None,
                      fit: DecayFit | None = None) -> LebesgueEstimate:
    """Sampled sup of the Lebesgue function, refined around the best sample.

    The value is a lower bound of Lambda(h) up to the truncation tail, which is
    reported as the uncertainty together with the gain of the last refinement.
    """
    cfg = sampling_cfg or SamplingConfig()
    d = L.d
    if cfg.halo is not None:
        W, tail = cfg.halo, 0.0
        if fit is not None:
            tail = truncation_bound(fit, W, d)
    else:
        W, tail = resolve_halo(L, cfg.tol, fit)

    axis = np.linspace(0.0, 0.5, (cfg.samples + 1) // 2)
    points = _grid(axis, d)
    values = np.array([lebesgue_function(L, y, W) for y in points])
    best = int(np.argmax(values))
    y_best, value = points[best], float(values[best])
    count = points.shape[0]

    step = axis[1] - axis[0]
    gain = 0.0
    stencil = _grid(np.linspace(-1.0, 1.0, 5), d)
    for _ in range(cfg.refine_rounds):
        step *= 0.5
        local = np.clip(y_best + step * stencil, 0.0, 0.5)
        local_values = np.array([lebesgue_function(L, y, W) for y in local])
        count += local.shape[0]
        i = int(np.argmax(local_values))
        gain = max(0.0, float(local_values[i]) - value)
        if local_values[i] > value:
            y_best, value = local[i], float(local_values[i])

    estimate = LebesgueEstimate(value, tail + gain, tuple(float(v) for v in y_best), L.h, W, count)
    log.info(f"Lambda(h={L.h:g}) = {value:.8f} +- {estimate.uncertainty:.1e} at y={estimate.maximizer}, W={W}")
    return estimate


def random_operator_norm(L: LagrangeFunction, W: int, trials: int = 64, seed: int = 0) -> float:
    """max |I_h f(x)| over random x and random data with ||f||_inf = 1.

    A lower bound for Lambda(h), up to the truncation tail.
    """
    rng = np.random.default_rng(seed)
    d = L.d
    best = 0.0
    for _ in range(trials):
        y = rng.uniform(0.0, 1.0, size=d)
        kernel = L.lattice_values(y, W)
        data = rng.choice((-1.0, 1.0), size=kernel.shape)
        best = max(best, abs(float(np.sum(data * kernel))))
    return best

"""Lagrange functions chi_h(y) = sum_k a_k Phi_h(y - k) of cardinal interpolation.

The coefficients a_k are the Fourier coefficients of 1/sigma, taken from an
inverse DFT on the symbol grid. The grid is doubled until aliasing no longer
changes them.
"""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve

from ..core import constants as C
from ..core.errors import (
    AccuracyError, AliasingError, DomainError, InsufficientDataError, QuadratureError,
)
from ..kernels.kernels import KernelFamily, KernelSpec, panel_rule
from ..utils.logger import get_logger
from . import lattice_sums
from .symbol import Route, SymbolGrid, build_symbol, omega_ratio

log = get_logger("lagrange")


@dataclass(frozen=True, eq=False)
class LagrangeFunction:
    """Coefficients a_k over ||k||_inf <= radius, stored centred (index k + radius)."""
    spec: KernelSpec
    h: float
    coefficients: np.ndarray
    radius: int
    coefficient_tail: float
    grid_size: int
    route: Route = Route.SPATIAL
    cardinal_residual: float = math.nan
    coefficient_error: float = 0.0

    @property
    def d(self) -> int:
        return self.spec.d

    def coefficient(self, k) -> float:
        k = np.atleast_1d(np.asarray(k, dtype=int))
        if k.size != self.d:
            raise DomainError(f"Index needs {self.d} components, got {k.size}")
        if np.max(np.abs(k)) > self.radius:
            return 0.0
        return float(self.coefficients[tuple(k + self.radius)])

    @property
    def coefficient_l1(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    def evaluate(self, y):
        return lagrange_eval(self, y)

    def scaled(self, x):
        """chi_h(x) = chi~_h(x / h)."""
        return lagrange_eval(self, np.asarray(x, dtype=float) / self.h)

    def lattice_values(self, offset, W: int) -> np.ndarray:
        """chi~_h(offset + n) for ||n||_inf <= W, shape (2W+1,)*d."""
        offset = np.broadcast_to(np.asarray(offset, dtype=float), (self.d,))
        reach = W + self.radius
        n = lattice_sums.lattice_points(reach, self.d).astype(float)
        kernel = self.spec.radial(self.h * np.sqrt(np.sum((n + offset) ** 2, axis=1)))
        kernel = kernel.reshape((2 * reach + 1,) * self.d)
        return convolve(self.coefficients, kernel, mode="valid")

    def coefficient_table(self):
        """Rows (k_1..k_d, a_k, error bound of a_k) in C order."""
        k = lattice_sums.lattice_points(self.radius, self.d)
        for index, value in zip(k, self.coefficients.ravel()):
            yield (*index, value, self.coefficient_error)

    def metadata(self) -> dict:
        return {
            "kernel": self.spec.kernel_id,
            "d": self.d,
            "m": self.spec.m,
            "h": self.h,
            "radius": self.radius,
            "coefficient_tail": self.coefficient_tail,
            "grid_size": self.grid_size,
            "route": self.route.value,
            "cardinal_residual": self.cardinal_residual,
            "coefficient_error": self.coefficient_error,
            "coefficient_l1": self.coefficient_l1,
        }


def _coefficients_from_grid(grid: SymbolGrid) -> np.ndarray:
    """fftshifted Fourier coefficients of 1/sigma on the grid."""
    return np.fft.fftshift(np.fft.ifftn(1.0 / grid.values).real)


def _crop(a: np.ndarray, radius: int) -> np.ndarray:
    centre = a.shape[0] // 2
    window = slice(centre - radius, centre + radius + 1)
    return a[(window,) * a.ndim]


def _shell_index(a: np.ndarray) -> np.ndarray:
    """||k||_inf for every entry of a centred coefficient array."""
    return np.abs(np.indices(a.shape) - a.shape[0] // 2).max(axis=0)


def rounding_level(coefficient_l1: float, phi0: float) -> float:
    """Achievable absolute accuracy of sum_k a_k Phi_h(y - k)."""
    return 100.0 * C.EPS * coefficient_l1 * abs(phi0)


def _converge(grid: SymbolGrid, tol: float, max_grid: int, symbol_tol: float, phi0: float):
    """Double the grid until the coefficients stop changing.

    Aliasing shrinks geometrically with M; once the boundary coefficients
    are below target and a doubling no longer halves the change, what is
    left is the rounding noise of the symbol and the change is accepted.
    """
    previous, last_change = None, math.inf
    while True:
        M = grid.grid_size
        a = _coefficients_from_grid(grid)
        target = max(tol, rounding_level(float(np.sum(np.abs(a))), phi0))
        boundary = float(np.sum(np.abs(a[_shell_index(a) >= M // 2 - 2]))) * phi0
        change = 0.0
        if previous is not None:
            overlap = previous.shape[0] // 2 - 1
            change = float(np.sum(np.abs(_crop(a, overlap) - _crop(previous, overlap)))) * phi0
        log.debug(f"M={M}: boundary={boundary:.2e}, change={change:.2e}, target={target:.2e}")
        if boundary < target and change < target:
            return grid, a, target, boundary, change
        stalled = previous is not None and change > C.ALIASING_STALL_RATIO * last_change
        if boundary < target and stalled and change < C.NOISE_ACCEPT_FACTOR * target:
            log.warning(f"{grid.spec.kernel_id} h={grid.h:g}: coefficient change stalled at "
                        f"{change:.2e} (target {target:.2e}), accepted as symbol noise at M={M}")
            return grid, a, target, boundary, change
        if 2 * M > max_grid:
            raise AliasingError(
                f"Lagrange coefficients of {grid.spec.kernel_id} at h={grid.h:g} did not "
                f"converge up to grid size {M}",
                achieved=max(boundary, change),
            )
        previous, last_change = a, (change if previous is not None else math.inf)
        grid = build_symbol(grid.spec, grid.h, 2 * M, symbol_tol, route=grid.route)


def _truncate(a: np.ndarray, phi0: float, threshold: float) -> tuple[int, float]:
    """Smallest radius whose dropped coefficients stay below threshold, and their l1 mass."""
    centre = a.shape[0] // 2
    shells = _shell_index(a)
    outside = np.bincount(shells.ravel(), weights=np.abs(a).ravel(), minlength=centre + 1)
    beyond = np.append(np.cumsum(outside[::-1])[::-1], 0.0)  # beyond[R] = sum over shells >= R
    for R in range(1, centre):
        if beyond[R + 1] * phi0 < threshold:
            return R, float(beyond[R + 1])
    return centre - 1, float(beyond[centre])


def lagrange_coefficients(grid: SymbolGrid, tol: float = C.COEFF_TOL,
                          max_grid: int = C.MAX_GRID,
                          symbol_tol: float = C.SYMBOL_TOL,
                          cardinal_tol: float | None = C.CARDINAL_TOL) -> LagrangeFunction:
    """Lagrange coefficients with aliasing control by grid doubling.

    Errors are measured on the level of chi~: a coefficient perturbation
    delta_k changes chi~ by at most sum |delta_k| Phi(0). The target is tol,
    raised to the rounding level 100 eps sum|a_k| Phi(0) when that is larger.

    Args:
        grid: Symbol grid at h > 0
        tol: Absolute tolerance for aliasing, boundary and truncation errors
        max_grid: Largest grid size per axis
        symbol_tol: Tolerance used when the symbol is rebuilt on a finer grid
        cardinal_tol: Bound on max |chi~(j) - delta_j0|; None only records the residual

    Raises:
        AliasingError: If the grid cap is reached first
        AccuracyError: If the cardinal residual stays above cardinal_tol
    """
    if not grid.h > 0:
        raise DomainError("Lagrange coefficients need h > 0")
    spec, h = grid.spec, grid.h
    phi0 = abs(float(spec.radial(0.0)))
    grid, a, target, boundary, change = _converge(grid, tol, max_grid, symbol_tol, phi0)
    M = grid.grid_size
    aliasing = (boundary + change) / phi0

    radius, dropped = _truncate(a, phi0, target)
    L = LagrangeFunction(spec, h, _crop(a, radius).copy(), radius, dropped + aliasing, M, grid.route)
    residual = cardinal_residual(L)
    if cardinal_tol is not None and residual > cardinal_tol and radius < M // 2 - 1:
        # keep every resolved coefficient before giving up
        wide, dropped = _truncate(a, phi0, tol)
        candidate = LagrangeFunction(spec, h, _crop(a, wide).copy(), wide, dropped + aliasing, M, grid.route)
        wide_residual = cardinal_residual(candidate)
        if wide_residual < residual:
            L, radius, residual = candidate, wide, wide_residual
    log.info(f"Lagrange function {spec.kernel_id} h={h:g}: M={M}, R_c={radius}, "
             f"tail={L.coefficient_tail:.2e}, residual={residual:.2e}")
    if cardinal_tol is not None and residual > cardinal_tol:
        raise AccuracyError(
            f"Cardinal residual {residual:.2e} of {spec.kernel_id} at h={h:g} above {cardinal_tol:g}",
            achieved=residual,
        )
    if residual > C.CARDINAL_TOL:
        log.warning(f"Cardinal residual {residual:.2e} for {spec.kernel_id} at h={h:g}")
    # aliasing bounds the l1 change of the coefficients, rounding adds 100 eps sum |a_k|
    error = aliasing + rounding_level(L.coefficient_l1, 1.0)
    return dataclasses.replace(L, cardinal_residual=residual, coefficient_error=error)


def cardinal_residual(L: LagrangeFunction, radius: int = C.CARDINAL_RADIUS) -> float:
    """max |chi~(j) - delta_j0| over ||j||_inf <= radius."""
    values = L.lattice_values(np.zeros(L.d), radius)
    values[(radius,) * L.d] -= 1.0
    return float(np.max(np.abs(values)))


def lagrange_function(spec: KernelSpec, h: float, grid_size: int = C.DEFAULT_GRID,
                      coeff_tol: float = C.COEFF_TOL, symbol_tol: float = C.SYMBOL_TOL,
                      route: Route | str | None = None,
                      max_grid: int = C.MAX_GRID, spatial_cap: int = C.SPATIAL_CAP,
                      poisson_cap: int = C.POISSON_CAP,
                      cardinal_tol: float | None = C.CARDINAL_TOL) -> LagrangeFunction:
    """Build the symbol and the Lagrange function in one step."""
    grid = build_symbol(spec, h, grid_size, symbol_tol, route=route,
                        spatial_cap=spatial_cap, poisson_cap=poisson_cap)
    return lagrange_coefficients(grid, coeff_tol, max_grid, symbol_tol, cardinal_tol)


def lagrange_eval(L: LagrangeFunction, y):
    """chi~_h(y) = sum_k a_k Phi_h(y - k) over the stored coefficients."""
    d = L.d
    y = np.asarray(y, dtype=float)
    if d == 1 and (y.ndim == 0 or y.shape[-1] != 1):
        lead = y.shape
    else:
        if y.shape[-1] != d:
            raise DomainError(f"Expected points with {d} coordinates, got shape {y.shape}")
        lead = y.shape[:-1]
    points = y.reshape(-1, d)
    k = lattice_sums.lattice_points(L.radius, d).astype(float)
    a = L.coefficients.ravel()
    out = np.empty(points.shape[0])
    step = max(1, lattice_sums.CHUNK_ENTRIES // k.shape[0])
    for start in range(0, points.shape[0], step):
        block = points[start:start + step]
        diff = block[:, None, :] - k[None, :, :]
        r = np.sqrt(np.einsum("nkd,nkd->nk", diff, diff))
        out[start:start + step] = L.spec.radial(L.h * r) @ a
    out = out.reshape(lead)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Fourier route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureConfig:
    """Gauss-Legendre rule on the period cell and lattice-sum truncation."""
    nodes: int = C.FOURIER_NODES
    panels: int = 2
    periods: int = C.FOURIER_PERIODS
    max_denominator: int = C.FOURIER_MAX_DENOMINATOR
    tol: float = C.FOURIER_TOL
    symbol_tol: float = C.SYMBOL_TOL
    sublattice_cap: int = 256


def common_denominator(y: np.ndarray, max_denominator: int) -> int | None:
    """Smallest P <= max_denominator with P*y integral, else None."""
    for P in range(1, max_denominator + 1):
        scaled = P * y
        if np.all(np.abs(scaled - np.round(scaled)) < 1e-12):
            return P
    return None


def _cell_rule(d: int, cfg: QuadratureConfig):
    x, w = panel_rule(np.linspace(-math.pi, math.pi, cfg.panels + 1), cfg.nodes)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    weights = np.meshgrid(*([w] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    return nodes, np.prod(np.stack([g.ravel() for g in weights], axis=-1), axis=1)


def _sublattice_radius(m: int, d: int, h: float, P: int, cfg: QuadratureConfig) -> int:
    omega_max = (h * h + d * math.pi ** 2) ** m
    cell = C.TWO_PI * P
    for Q in range(1, cfg.sublattice_cap + 1):
        estimate = lattice_sums.remainder_estimate(m, d, Q, True, cell) * P ** d * omega_max
        if estimate < cfg.tol * 1e-2:
            return Q
    raise QuadratureError(f"Sub-lattice sums with period {P} need more than {cfg.sublattice_cap} terms",
                          achieved=estimate)


def _phased_sum(t0, y, h: float, m: int, d: int, cfg: QuadratureConfig):
    """sum_(j != 0) e^(2 pi i y.j) g(t0 + 2 pi j) at the cell nodes."""
    g0 = (h * h + np.sum(t0 * t0, axis=1)) ** (-m)
    P = common_denominator(y, cfg.max_denominator) if d <= 2 else None
    if P is not None:
        Q = _sublattice_radius(m, d, h, P, cfg)
        total = np.zeros(t0.shape[0], dtype=complex)
        for r in lattice_sums.lattice_points(P - 1, d):
            if np.any(r < 0):
                continue
            phase = np.exp(2j * math.pi * float(np.dot(y, r)))
            shifted = t0 + C.TWO_PI * r
            total += phase * lattice_sums.periodic_sum(shifted, h, m, Q, cell=C.TWO_PI * P)
        return total - g0

    J = cfg.periods
    omega_max = (h * h + d * math.pi ** 2) ** m
    bound = lattice_sums.remainder_estimate(m, d, J, corrected=False) * omega_max
    if bound > cfg.tol:
        raise QuadratureError(
            f"Fourier route at y={y.tolist()} has truncation bound {bound:.2e} above {cfg.tol:g}",
            achieved=bound,
        )
    shifts = lattice_sums.lattice_points(J, d, exclude_origin=True).astype(float)
    phases = np.exp(2j * math.pi * (shifts @ y))
    u = t0[:, None, :] + C.TWO_PI * shifts[None, :, :]
    g = (h * h + np.einsum("nkd,nkd->nk", u, u)) ** (-m)
    return g @ phases


def lagrange_eval_fourier(spec: KernelSpec, h: float, y,
                          quad_cfg: QuadratureConfig | None = None) -> float:
    """chi~_h(y) = (2 pi)^-d int e^(i y.xi) omega(xi) (h^2 + |xi|^2)^-m d xi.

    The integral is folded onto the period cell, where the integrand is
    e^(i y.t) [ratio(t) + omega(t) sum_(j != 0) e^(2 pi i y.j) g(t + 2 pi j)].
    Works at h = 0 as well.
    """
    cfg = quad_cfg or QuadratureConfig()
    d, m = spec.d, spec.m
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (d,):
        raise DomainError(f"Expected a point with {d} coordinates, got shape {y.shape}")

    t0, w = _cell_rule(d, cfg)
    ratio = omega_ratio(spec, t0, h, cfg.symbol_tol).reshape(-1)
    with np.errstate(divide="ignore"):
        g0 = (h * h + np.sum(t0 * t0, axis=1)) ** (-m)
    omega = ratio / g0
    bracket = ratio + omega * _phased_sum(t0, y, h, m, d, cfg)
    integrand = np.exp(1j * (t0 @ y)) * bracket
    value = (w @ integrand) / C.TWO_PI ** d
    return float(value.real)


# ---------------------------------------------------------------------------
# decay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    """|chi~(y)| ~ A e^(-B |y|) fitted on the annulus r_min <= |y| <= r_max.

    amplitude and rate come from the least-squares line through
    (|y|, log |chi~(y)|); bound_amplitude lifts that line until it lies
    above every sample and is what halo widths are sized with.
    """
    amplitude: float
    rate: float
    residual: float
    annulus: tuple[float, float]
    sample_count: int
    norm_used: str = "euclidean"
    finite_support: bool = False
    bound_amplitude: float | None = None
    amplitude_uncertainty: float = 0.0
    rate_uncertainty: float = 0.0
    h: float = field(default=math.nan, compare=False)

    @property
    def envelope(self) -> float:
        return self.amplitude if self.bound_amplitude is None else self.bound_amplitude

    def bound(self, r):
        return self.envelope * np.exp(-self.rate * np.asarray(r, dtype=float))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def default_floor(L: LagrangeFunction) -> float:
    """Rounding level of a value computed as sum_k a_k Phi_h(y - k)."""
    return max(C.DECAY_FLOOR, rounding_level(L.coefficient_l1, float(L.spec.radial(0.0))))


def has_finite_support(spec: KernelSpec) -> bool:
    """chi~ of the d = 1, m = 1 Matern kernel vanishes for |y| >= 1."""
    return spec.family == KernelFamily.MATERN and spec.d == 1 and spec.m == 1


def decay_samples(L: LagrangeFunction, radius: int = C.DECAY_FIT_RADIUS):
    """(|y|, chi~(y)) at offsets in {1/4, 1/2, 3/4}^d, 2 <= |y| <= radius."""
    offsets = lattice_sums.lattice_points(1, L.d) * 0.25 + 0.5
    n = lattice_sums.lattice_points(radius, L.d).astype(float)
    radii, values = [], []
    for s in offsets:
        chi = L.lattice_values(s, radius).ravel()
        r = np.sqrt(np.sum((n + s) ** 2, axis=1))
        keep = (r >= C.DECAY_R_MIN) & (r <= radius)
        radii.append(r[keep])
        values.append(chi[keep])
    return np.concatenate(radii), np.concatenate(values)


def fit_decay(L: LagrangeFunction, samples=None, floor: float | None = None) -> DecayFit:
    """Least-squares line through (|y|, log |chi~(y)|) over the samples above the floor.

    A = e^intercept and B = -slope; the residual is the rms deviation in log
    scale. A Lagrange function known to be finitely supported with nothing
    above the floor is reported with B = inf.

    Raises:
        InsufficientDataError: If fewer than 10 samples are usable
    """
    radii, values = decay_samples(L) if samples is None else map(np.asarray, samples)
    floor = default_floor(L) if floor is None else floor
    magnitude = np.abs(values)
    usable = (magnitude > floor) & (radii >= C.DECAY_R_MIN)
    count = int(np.count_nonzero(usable))
    annulus = (float(np.min(radii)), float(np.max(radii)))
    if count == 0 and has_finite_support(L.spec):
        log.info(f"No samples above {floor:.1e} on {annulus}: finite support at h={L.h:g}")
        return DecayFit(1.0, math.inf, 0.0, annulus, 0, finite_support=True, h=L.h)
    if count < C.DECAY_MIN_SAMPLES:
        raise InsufficientDataError(f"Only {count} samples above the floor {floor:.1e} on {annulus}")

    r, v = radii[usable], np.log(magnitude[usable])
    if np.ptp(r) == 0:
        raise InsufficientDataError("Usable samples all lie at one radius")
    (slope, intercept), cov = np.polyfit(r, v, 1, cov="unscaled")
    if slope >= 0:
        raise InsufficientDataError(f"Samples on {annulus} show no decay (slope {slope:.3g})")
    deviation = v - (slope * r + intercept)
    residual = float(np.sqrt(np.mean(deviation ** 2)))
    # standard errors from the unscaled covariance and the residual variance
    variance = float(np.sum(deviation ** 2)) / (count - 2)
    rate_error, intercept_error = np.sqrt(np.maximum(np.diag(cov) * variance, 0.0))
    amplitude = float(np.exp(intercept))
    fit = DecayFit(amplitude, float(-slope), residual, (float(np.min(r)), float(np.max(r))), count,
                   bound_amplitude=float(np.exp(intercept + max(0.0, float(np.max(deviation))))),
                   amplitude_uncertainty=amplitude * float(intercept_error),
                   rate_uncertainty=float(rate_error), h=L.h)
    log.debug(f"Decay fit h={L.h:g}: A={fit.amplitude:.3e}, B={fit.rate:.4f} +- {fit.rate_uncertainty:.1e}, "
              f"residual={residual:.2e}, envelope A={fit.envelope:.3e}")
    return fit


def decay_uniformity(fits: list[DecayFit]) -> dict:
    """Spread of fitted rates and amplitudes over a sweep in h."""
    decaying = [f for f in fits if not f.finite_support]
    if not decaying:
        return {"min_rate": math.inf, "max_rate": math.inf, "amplitude_ratio": 1.0,
                "count": len(fits), "finite_support": len(fits)}
    rates = [f.rate for f in decaying]
    amplitudes = [f.amplitude for f in decaying]
    return {
        "min_rate": min(rates),
        "max_rate": max(rates),
        "amplitude_ratio": max(amplitudes) / min(amplitudes),
        "count": len(fits),
        "finite_support": len(fits) - len(decaying),
    }

"""Cardinal symbol sigma(t, h), inverse symbol omega and the synthesis condition.

Two routes build sigma on the grid t_l = 2 pi l / M:

* spatial: sigma(t) = sum_k Phi_h(k) e^(i k.t), folded modulo M and
  transformed with one FFT;
* poisson: sigma(t) = rho h^(2m-d) sum_k (h^2 + |t + 2 pi k|^2)^(-m), Matern only,
  also usable at h = 0 where it yields the un-normalized sum.
"""

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..core import constants as C
from ..core.errors import (
    CorruptedGridError, DomainError, InvalidSpecError, RouteInfeasibleError,
)
from ..kernels.kernels import KernelFamily, KernelSpec, matern_rho
from ..utils.logger import get_logger
from . import lattice_sums

log = get_logger("symbol")


class Route(str, Enum):
    SPATIAL = "spatial"
    POISSON = "poisson"


@dataclass(frozen=True, eq=False)
class SymbolGrid:
    """Symbol values on the uniform grid of [0, 2 pi)^d."""
    spec: KernelSpec
    h: float
    grid_size: int
    values: np.ndarray
    route: Route
    truncation_radius: int
    tail_bound: float
    rho: float | None = None
    omega: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def scale(self) -> float:
        """omega * sigma; rho h^(2m-d) for Matern at h > 0, otherwise 1."""
        if self.rho is None or self.h == 0:
            return 1.0
        return self.rho * self.h ** (2 * self.m - self.d)

    def nodes(self) -> np.ndarray:
        """Grid nodes, shape (M,)*d + (d,)."""
        axis = C.TWO_PI * np.arange(self.grid_size) / self.grid_size
        grids = np.meshgrid(*([axis] * self.d), indexing="ij")
        return np.stack(grids, axis=-1)

    def max_symmetry_defect(self) -> float:
        """max |sigma(t) - sigma(-t mod 2 pi)| over finite grid values."""
        mirrored = reflect(self.values)
        finite = np.isfinite(self.values)
        if not np.any(finite):
            return 0.0
        return float(np.max(np.abs(self.values[finite] - mirrored[finite])))

    def table_rows(self):
        """Rows (t_1..t_d, sigma, omega, tail_bound) in C order."""
        t = self.nodes().reshape(-1, self.d)
        sigma = self.values.ravel()
        omega = np.full_like(sigma, math.nan) if self.omega is None else self.omega.ravel()
        for i in range(sigma.size):
            yield (*t[i], sigma[i], omega[i], self.tail_bound)

    def table_header(self) -> list[str]:
        return [f"t{i + 1}" for i in range(self.d)] + ["sigma", "omega", "tail_bound"]

    def metadata(self) -> dict:
        return {
            "kernel": self.spec.kernel_id,
            "d": self.d,
            "m": self.m,
            "h": self.h,
            "grid_size": self.grid_size,
            "route": self.route.value,
            "truncation_radius": self.truncation_radius,
            "tail_bound": self.tail_bound,
            "rho": self.rho,
            "min_sigma": float(np.min(self.values)),
            "symmetry_defect": self.max_symmetry_defect(),
        }


def reflect(values: np.ndarray) -> np.ndarray:
    """values[(-l) mod M] along every axis."""
    out = values
    for axis in range(values.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def _check_grid_size(M: int):
    if M < 2 or M % 2:
        raise DomainError(f"Grid size must be an even integer >= 2, got {M}")


def _check_scale(h: float, allow_zero: bool = False):
    lower_ok = h >= 0 if allow_zero else h > 0
    if not (lower_ok and h <= 1):
        bound = "[0, 1]" if allow_zero else "(0, 1]"
        raise DomainError(f"Scale h must lie in {bound}, got {h}")


def _require_decaying(spec: KernelSpec):
    if spec.family == KernelFamily.M_HARMONIC:
        raise InvalidSpecError("The m-harmonic kernel has no cardinal symbol; use a Matern kernel at h = 0")


def _require_matern(spec: KernelSpec):
    if spec.family != KernelFamily.MATERN:
        raise InvalidSpecError(f"{spec.kernel_id}: only Matern kernels have an algebraic Fourier transform")


# ---------------------------------------------------------------------------
# spatial route
# ---------------------------------------------------------------------------

def symbol_lower_bound(spec: KernelSpec, h: float) -> float:
    """Lower bound of a Matern symbol, the k = 0 Poisson term at the cell corner."""
    return matern_rho(spec.m, spec.d) * h ** (2 * spec.m - spec.d) * \
        lattice_sums.reference_scale(spec.m, spec.d, h)


def spatial_radius(spec: KernelSpec, h: float, tol: float, cap: int) -> tuple[int, float]:
    """Truncation radius K of the spatial sum and its tail bound.

    Compact kernels are summed exactly; for Matern kernels K is the first
    radius where sum_(n>K) 2d (2n+1)^(d-1) C0 e^(-alpha h n) drops below
    SPATIAL_TAIL_MARGIN * tol times the symbol lower bound.
    """
    if spec.is_compact:
        K = int(math.ceil(spec.support_radius / h))
        if K > cap:
            raise RouteInfeasibleError(f"Spatial sum needs K={K} > cap {cap}", achieved=math.inf)
        return K, 0.0

    alpha, c0, d = spec.decay_rate_alpha, spec.decay_amplitude_C0, spec.d
    target = tol * C.SPATIAL_TAIL_MARGIN * symbol_lower_bound(spec, h)
    n_max = cap + int(math.ceil(80.0 / (alpha * h))) + 1
    n = np.arange(1, n_max + 1, dtype=float)
    with np.errstate(under="ignore"):
        terms = 2 * d * (2 * n + 1) ** (d - 1) * c0 * np.exp(-alpha * h * n)
    tails = np.cumsum(terms[::-1])[::-1]  # tails[K] = sum over n > K
    if tails[cap] >= target:
        raise RouteInfeasibleError(
            f"Spatial sum for {spec.kernel_id} at h={h:g} needs more than {cap} terms "
            f"per axis; use the poisson route",
            achieved=float(tails[cap] / symbol_lower_bound(spec, h)),
        )
    K = max(1, int(np.argmax(tails < target)))
    return K, float(tails[K])


def _folded_coefficients(spec: KernelSpec, h: float, K: int, M: int) -> np.ndarray:
    """c_r = sum_(k = r mod M, ||k||_inf <= K) Phi_h(k)."""
    d = spec.d
    size = M ** d
    if d == 1:
        k = np.arange(-K, K + 1)
        return np.bincount(k % M, weights=spec.radial(h * np.abs(k)), minlength=M)

    rest = lattice_sums.lattice_points(K, d - 1)
    rest_sq = np.sum(rest.astype(float) ** 2, axis=1)
    rest_index = np.ravel_multi_index(tuple((rest % M).T), (M,) * (d - 1))
    folded = np.zeros(size)
    for k1 in range(-K, K + 1):
        values = spec.radial(h * np.sqrt(k1 * k1 + rest_sq))
        index = (k1 % M) * M ** (d - 1) + rest_index
        folded += np.bincount(index, weights=values, minlength=size)
    return folded.reshape((M,) * d)


def symbol_spatial(spec: KernelSpec, h: float, M: int = C.DEFAULT_GRID,
                   tol: float = C.SYMBOL_TOL, cap: int = C.SPATIAL_CAP) -> SymbolGrid:
    """Symbol from the spatial lattice sum of kernel values."""
    _require_decaying(spec)
    _check_scale(h)
    _check_grid_size(M)
    K, tail = spatial_radius(spec, h, tol, cap)

    transformed = np.fft.fftn(_folded_coefficients(spec, h, K, M))
    scale = float(np.max(np.abs(transformed.real)))
    imag = float(np.max(np.abs(transformed.imag)))
    if imag > C.IMAG_TOL * scale * max(1.0, math.log2(M ** spec.d)):
        raise CorruptedGridError(f"Symbol has imaginary part {imag:.3e} (scale {scale:.3e})")
    values = transformed.real
    values = 0.5 * (values + reflect(values))

    rho = matern_rho(spec.m, spec.d) if spec.family == KernelFamily.MATERN else None
    grid = SymbolGrid(spec, float(h), M, values, Route.SPATIAL, K, tail, rho)
    _check_positive(grid)
    log.debug(f"Spatial symbol {spec.kernel_id} h={h:g} M={M} K={K} tail={tail:.2e}")
    return grid


# ---------------------------------------------------------------------------
# poisson route
# ---------------------------------------------------------------------------

def _mirror_index(M: int) -> np.ndarray:
    l = np.arange(M)
    return np.minimum(l, M - l)


def symbol_poisson(spec: KernelSpec, h: float, M: int = C.DEFAULT_GRID,
                   tol: float = C.SYMBOL_TOL, cap: int = C.POISSON_CAP) -> SymbolGrid:
    """Symbol from the Poisson-summed Fourier transform (Matern only, h in [0, 1]).

    At h = 0 the values are the un-normalized sum with +inf at t = 0.
    """
    _require_matern(spec)
    _check_scale(h, allow_zero=True)
    _check_grid_size(M)
    d, m = spec.d, spec.m
    K, bound = lattice_sums.choose_radius(m, d, h, tol, cap)

    # S is even in every component, so only [0, pi]^d is computed
    half_axis = C.TWO_PI * np.arange(M // 2 + 1) / M
    half = np.stack(np.meshgrid(*([half_axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    sums = lattice_sums.periodic_sum(half, h, m, K).reshape((M // 2 + 1,) * d)
    index = _mirror_index(M)
    values = sums[np.ix_(*([index] * d))]

    rho = matern_rho(m, d)
    if h > 0:
        values = values * rho * h ** (2 * m - d)
    grid = SymbolGrid(spec, float(h), M, values, Route.POISSON, K, bound, rho)
    _check_positive(grid)
    log.debug(f"Poisson symbol {spec.kernel_id} h={h:g} M={M} K={K} bound={bound:.2e}")
    return grid


def _check_positive(grid: SymbolGrid):
    values = grid.values
    if grid.h == 0:
        values = values.ravel()[1:]
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise CorruptedGridError(f"Symbol of {grid.spec.kernel_id} at h={grid.h:g} is not strictly positive")


def inverse_symbol(grid: SymbolGrid) -> SymbolGrid:
    """omega = scale / sigma; at h = 0 omega = 1/S with omega(0) = 0."""
    _check_positive(grid)
    with np.errstate(divide="ignore"):
        omega = grid.scale / grid.values
    if grid.h == 0:
        omega.flat[0] = 0.0
    return dataclasses.replace(grid, omega=omega)


def default_route(spec: KernelSpec, h: float) -> Route:
    if spec.family == KernelFamily.MATERN and spec.d <= 2 and h <= C.POISSON_ROUTE_MAX_H:
        return Route.POISSON
    return Route.SPATIAL


def build_symbol(spec: KernelSpec, h: float, M: int = C.DEFAULT_GRID, tol: float = C.SYMBOL_TOL,
                 route: Route | str | None = None, spatial_cap: int = C.SPATIAL_CAP,
                 poisson_cap: int = C.POISSON_CAP) -> SymbolGrid:
    """Symbol and inverse symbol on the M^d grid by the requested or default route."""
    route = default_route(spec, h) if route in (None, "auto") else Route(route)
    if route == Route.POISSON:
        grid = symbol_poisson(spec, h, M, tol, poisson_cap)
    else:
        grid = symbol_spatial(spec, h, M, tol, spatial_cap)
    return inverse_symbol(grid)


# ---------------------------------------------------------------------------
# ratio and synthesis condition
# ---------------------------------------------------------------------------

def omega_ratio(spec: KernelSpec, t, h: float, tol: float = C.SYMBOL_TOL):
    """omega(t) / (h^2 + |t|^2)^m = 1 / (1 + (h^2 + |t|^2)^m G(t)), G the k != 0 sum.

    t has shape (..., d) with components in [-pi, pi]; the value at t = 0, h = 0 is 1.
    """
    _require_matern(spec)
    _check_scale(h, allow_zero=True)
    d, m = spec.d, spec.m
    t = np.asarray(t, dtype=float)
    if d == 1 and (t.ndim == 0 or t.shape[-1] != 1):
        lead = t.shape
    else:
        lead = t.shape[:-1]
    points = t.reshape(-1, d)
    if np.any(np.abs(points) > math.pi + 1e-12):
        raise DomainError("omega_ratio expects t in [-pi, pi]^d")
    K, _ = lattice_sums.choose_radius(m, d, h, tol)
    others = lattice_sums.periodic_sum(points, h, m, K, exclude_origin=True)
    q = (h * h + np.sum(points * points, axis=1)) ** m
    ratio = 1.0 / (1.0 + q * others)
    ratio = ratio.reshape(lead)
    return float(ratio) if ratio.ndim == 0 else ratio


@dataclass(frozen=True)
class SynthesisResult:
    measured_sup: float
    proof_bound: float
    h: float
    delta: float
    K_sum: int

    @property
    def holds(self) -> bool:
        return self.measured_sup <= self.proof_bound * (1.0 + 1e-12)


def _ball_samples(d: int, delta: float) -> np.ndarray:
    """Points of [0, delta]^d inside the ball |t| <= delta."""
    per_axis = {1: C.SYNTHESIS_SAMPLES, 2: 41}.get(d, 13)
    axis = np.linspace(0.0, delta, per_axis)
    points = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return points[np.sum(points * points, axis=1) <= delta * delta * (1 + 1e-12)]


def synthesis_condition(spec: KernelSpec, h: float, delta: float,
                        K_sum: int = 8) -> SynthesisResult:
    """Sampled sup of sum_(j != 0) Phi_h^(h t + 2 pi j) / Phi_h^(h t) over |t| <= delta.

    The proof bound h^(2m) (1 + delta^2)^m sum_(j != 0) (2 pi |j| - delta)^(-2m)
    runs over the same truncated set of j.
    """
    _require_matern(spec)
    _check_scale(h)
    if not 0 < delta < math.pi:
        raise DomainError(f"delta must lie in (0, pi), got {delta}")
    d, m = spec.d, spec.m
    shifts = C.TWO_PI * lattice_sums.lattice_points(K_sum, d, exclude_origin=True).astype(float)
    t = _ball_samples(d, delta)

    u = h * t[:, None, :] + shifts[None, :, :]
    denominators = (h * h + np.einsum("nkd,nkd->nk", u, u)) ** m
    numerators = h ** (2 * m) * (1.0 + np.sum(t * t, axis=1)) ** m
    measured = float(np.max(numerators * np.sum(1.0 / denominators, axis=1)))

    norms = np.sqrt(np.sum(shifts * shifts, axis=1))
    bound = float(h ** (2 * m) * (1.0 + delta * delta) ** m * np.sum((norms - delta) ** (-2.0 * m)))
    return SynthesisResult(measured, bound, float(h), float(delta), int(K_sum))

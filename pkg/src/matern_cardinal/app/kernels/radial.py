"""Radial Fourier transforms and perturbation profiles of radial functions.

For a radial psi on R^d the Fourier transform is again radial and, up to the
factor (2 pi)^(d/2), equals

    (F_d psi)(r) = r^(1-d/2) int_0^inf psi(t) t^(d/2) J_(d/2-1)(r t) dt.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import constants as C
from ..core.errors import DomainError, InvalidProfileError
from ..utils.logger import get_logger
from .kernels import RadialProfile, graded_edges, panel_rule
from .specfun import bessel_j

log = get_logger("radial")

SUPPORTED_DIMENSIONS = (1, 2, 3)
FIT_RADII = np.linspace(1.0, 20.0, 191)


def _check_dimension(d: int):
    if d not in SUPPORTED_DIMENSIONS:
        raise InvalidProfileError(f"Radial transforms are available for d in {SUPPORTED_DIMENSIONS}, got {d}")


def bessel_basis(d: int, x):
    """x^(1-d/2) J_(d/2-1)(x), continuous at x = 0."""
    _check_dimension(d)
    x = np.asarray(x, dtype=float)
    if d == 1:
        return math.sqrt(2.0 / math.pi) * np.cos(x)
    if d == 2:
        return bessel_j(0, np.abs(x))
    with np.errstate(invalid="ignore", divide="ignore"):
        return math.sqrt(2.0 / math.pi) * np.where(x == 0.0, 1.0, np.sin(x) / np.where(x == 0.0, 1.0, x))


def _upper_limit(profile: RadialProfile) -> float:
    if profile.is_compact:
        return profile.support_radius
    if profile.decay_rate > 0:
        return C.DECAY_SAMPLE_RADIUS / profile.decay_rate
    raise InvalidProfileError(f"Profile {profile.name or '?'} is neither compact nor exponentially decaying")


def _edges(profile: RadialProfile, upper: float, r: float) -> np.ndarray:
    width = min(1.0, C.RADIAL_FT_PHASE_PER_PANEL / r) if r > 0 else 1.0
    base = graded_edges(upper, unit=width, levels=12)
    knots = [k for k in profile.knots if 0 < k < upper]
    return np.unique(np.concatenate((base, knots)))


def _panel_transform(profile: RadialProfile, d: int, radius: float, upper: float, nodes: int) -> float:
    t, w = panel_rule(_edges(profile, upper, radius), nodes)
    psi = profile(t)
    if d == 1:
        kernel = math.sqrt(2.0 / math.pi) * np.cos(radius * t)
    elif d == 2:
        kernel = t * bessel_j(0, radius * t)
    else:
        kernel = math.sqrt(2.0 / math.pi) * t * np.sin(radius * t) / radius
    return float(np.sum(w * psi * kernel))


def _check_radii(r) -> np.ndarray:
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(~(r_arr >= 0)):
        raise DomainError("radial_ft needs r >= 0")
    return r_arr


def radial_ft(profile: RadialProfile, d: int, r):
    """(F_d psi)(r) by Gauss-Legendre panels aligned with the knots.

    The panel width keeps the oscillation below RADIAL_FT_PHASE_PER_PANEL
    radians; decaying profiles are truncated at 50 / decay_rate.
    """
    _check_dimension(d)
    r_arr = _check_radii(r)
    upper = _upper_limit(profile)
    out = np.empty_like(r_arr)
    for i, radius in enumerate(r_arr):
        if radius == 0.0:
            out[i] = radial_ft_at_origin(profile, d)
        else:
            out[i] = _panel_transform(profile, d, radius, upper, C.RADIAL_FT_NODES)
    return float(out[0]) if np.ndim(r) == 0 else out


def radial_ft_error(profile: RadialProfile, d: int, r):
    """Error estimate of radial_ft: the gap to the half-order panel rule plus the cut-off tail."""
    _check_dimension(d)
    r_arr = _check_radii(r)
    upper = _upper_limit(profile)
    tail = 0.0
    if not profile.is_compact:
        # |psi| <= psi(upper) e^(-rate (t - upper)) beyond the cut-off, Bessel factor <= 1
        tail = abs(float(profile(upper))) * max(upper, 1.0) ** (d - 1) / profile.decay_rate
    coarse_nodes = C.RADIAL_FT_NODES // 2
    out = np.empty_like(r_arr)
    for i, radius in enumerate(r_arr):
        if radius == 0.0:
            fine = radial_ft_at_origin(profile, d)
            coarse = radial_ft_at_origin(profile, d, coarse_nodes)
        else:
            fine = _panel_transform(profile, d, radius, upper, C.RADIAL_FT_NODES)
            coarse = _panel_transform(profile, d, radius, upper, coarse_nodes)
        out[i] = abs(fine - coarse) + tail + C.EPS * abs(fine)
    return float(out[0]) if np.ndim(r) == 0 else out


def radial_ft_at_origin(profile: RadialProfile, d: int, nodes: int = C.RADIAL_FT_NODES) -> float:
    """lim_(r->0) F_d psi = int psi(t) t^(d-1) dt / (2^(d/2-1) Gamma(d/2))."""
    _check_dimension(d)
    edges = np.unique(np.concatenate((graded_edges(_upper_limit(profile)), profile.knots)))
    t, w = panel_rule(edges, nodes)
    integral = float(np.sum(w * profile(t) * t ** (d - 1)))
    return integral / (2.0 ** (d / 2 - 1) * math.gamma(d / 2))


@dataclass(frozen=True)
class PerturbationProfile:
    """F_d psi(r) = prefactor r^(-2m) lambda(r), lambda(r) = 1 + sum_j a_j B(r_j r).

    B is bessel_basis in dimension `dimension`.
    """
    nodes: tuple[float, ...]
    coefficients: tuple[float, ...]
    limit_beta: float
    dimension: int
    m: int
    prefactor: float
    residual: float = 0.0
    source: str = field(default="", compare=False)

    def lambda_values(self, r):
        r = np.asarray(r, dtype=float)
        total = np.ones_like(r)
        for node, coeff in zip(self.nodes, self.coefficients):
            total = total + coeff * bessel_basis(self.dimension, node * r)
        return total

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = self.prefactor * self.lambda_values(r) / r ** (2 * self.m)
        return np.where(r == 0.0, self.limit_beta, values)

    def is_positive(self, r) -> bool:
        return bool(np.all(self.lambda_values(r) > 0))


def fit_perturbation(profile: RadialProfile, d_form: int, m: int, nodes,
                     prefactor: float | None = None, radii=None) -> PerturbationProfile:
    """Fit r^(2m) F psi(r) = prefactor (1 + sum_j a_j B(r_j r)) by least squares.

    With `prefactor` given only the a_j are fitted, otherwise the prefactor is
    fitted as well. The transform itself is taken in the profile's own dimension.
    """
    _check_dimension(d_form)
    nodes = tuple(float(n) for n in nodes)
    radii = FIT_RADII if radii is None else np.asarray(radii, dtype=float)
    scaled = radial_ft(profile, profile.dimension, radii) * radii ** (2 * m)
    basis = np.column_stack([bessel_basis(d_form, node * radii) for node in nodes])

    if prefactor is not None:
        target = scaled / prefactor - 1.0
        coeffs, *_ = np.linalg.lstsq(basis, target, rcond=None)
        fitted_prefactor = float(prefactor)
    else:
        design = np.column_stack((np.ones_like(radii), basis))
        solution, *_ = np.linalg.lstsq(design, scaled, rcond=None)
        fitted_prefactor = float(solution[0])
        coeffs = solution[1:] / fitted_prefactor

    model = fitted_prefactor * (1.0 + basis @ coeffs)
    residual = float(np.max(np.abs(model - scaled)) / np.max(np.abs(scaled)))
    result = PerturbationProfile(
        nodes=nodes,
        coefficients=tuple(float(c) for c in coeffs),
        limit_beta=radial_ft_at_origin(profile, profile.dimension),
        dimension=d_form,
        m=m,
        prefactor=fitted_prefactor,
        residual=residual,
        source=profile.name,
    )
    log.info(f"Fitted {profile.name}: prefactor={fitted_prefactor:.12g}, "
             f"coefficients={result.coefficients}, relative residual={residual:.2e}")
    return result


def sobolev_bounds(profile: RadialProfile, m: int, r) -> tuple[float, float]:
    """Constants A, B with A (1+r^2)^(-m) <= F_d psi(r) <= B (1+r^2)^(-m) on the samples."""
    r = np.asarray(r, dtype=float)
    ratio = radial_ft(profile, profile.dimension, r) * (1.0 + r * r) ** m
    lower, upper = float(np.min(ratio)), float(np.max(ratio))
    if lower <= 0:
        log.warning(f"{profile.name}: transform is not positive on the samples (min ratio {lower:.3e})")
    return lower, upper

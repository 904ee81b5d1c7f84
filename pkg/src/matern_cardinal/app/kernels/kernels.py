"""Kernel families: Matern, m-harmonic and compactly supported profiles.

Every family is addressable by a stable string id::

    matern:m=2,d=2     Matern kernel Phi_{m,d}(x) = |x|^nu K_nu(|x|), nu = m - d/2
    mharmonic:m=2,d=2  polyharmonic limit kernel
    eta2               C^2 profile supported on [0, 2] (d = 2, m = 2)
    psi2               quartic profile supported on [0, 2] (d = 1, m = 2)
    psi32              -psi2'(t)/t (d = 3, m = 2)
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import roots_legendre, xlogy

from ..core import constants as C
from ..core.errors import DomainError, InvalidSpecError
from ..utils.logger import get_logger
from .specfun import BesselOrder, scaled_bessel_k

log = get_logger("kernels")

LN2 = math.log(2.0)


class KernelFamily(str, Enum):
    MATERN = "matern"
    M_HARMONIC = "m_harmonic"
    ETA2 = "eta2"
    PSI2 = "psi2"
    PSI32 = "psi32"


COMPACT_FAMILIES = (KernelFamily.ETA2, KernelFamily.PSI2, KernelFamily.PSI32)

# (m, d) of the compactly supported profiles
_COMPACT_SHAPES = {
    KernelFamily.ETA2: (2, 2),
    KernelFamily.PSI2: (2, 1),
    KernelFamily.PSI32: (2, 3),
}


@dataclass(frozen=True)
class RadialProfile:
    """Radial function r >= 0 -> real, zero beyond its support radius."""
    profile: Callable[[np.ndarray], np.ndarray]
    dimension: int
    support_radius: float = math.inf
    normalization_rho: float | None = None
    knots: tuple[float, ...] = ()
    name: str = ""
    decay_rate: float = 0.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        values = np.asarray(self.profile(r), dtype=float)
        if math.isfinite(self.support_radius):
            values = np.where(r > self.support_radius, 0.0, values)
        return values

    @property
    def is_compact(self) -> bool:
        return math.isfinite(self.support_radius)


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel family, its orders and decay metadata |Phi(x)| <= C0 e^(-alpha |x|)."""
    family: KernelFamily
    m: int
    d: int
    decay_rate_alpha: float = 1.0
    decay_amplitude_C0: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.d < 1:
            raise InvalidSpecError(f"m and d must be positive, got m={self.m}, d={self.d}")
        if 2 * self.m <= self.d:
            raise InvalidSpecError(f"Kernel needs 2m > d, got m={self.m}, d={self.d}")
        if self.family in _COMPACT_SHAPES and (self.m, self.d) != _COMPACT_SHAPES[self.family]:
            m, d = _COMPACT_SHAPES[self.family]
            raise InvalidSpecError(f"{self.family.value} is defined for m={m}, d={d}")
        if not 0 < self.decay_rate_alpha <= 1:
            raise InvalidSpecError(f"decay_rate_alpha must lie in (0, 1], got {self.decay_rate_alpha}")
        if self.decay_amplitude_C0 <= 0:
            raise InvalidSpecError("decay_amplitude_C0 must be positive")

    @property
    def kernel_id(self) -> str:
        if self.family == KernelFamily.MATERN:
            return f"matern:m={self.m},d={self.d}"
        if self.family == KernelFamily.M_HARMONIC:
            return f"mharmonic:m={self.m},d={self.d}"
        return self.family.value

    @property
    def file_stem(self) -> str:
        """Kernel part of report file names."""
        return self.kernel_id.split(":", 1)[0]

    @property
    def nu(self) -> float:
        return self.m - self.d / 2

    @property
    def is_compact(self) -> bool:
        return self.family in COMPACT_FAMILIES

    @property
    def support_radius(self) -> float:
        return C.COMPACT_SUPPORT if self.is_compact else math.inf

    def radial(self, r):
        """Kernel value as a function of the radius."""
        return _REGISTRY[self.family](self, r)

    def radial_uncertainty(self, r):
        """Absolute accuracy of radial(r); only integer-order K_nu is not a closed form."""
        values = np.abs(np.asarray(self.radial(r), dtype=float))
        if self.family == KernelFamily.MATERN and self.d % 2 == 0:
            return values * C.K_VALUE_RTOL
        return values * 16.0 * C.EPS

    def evaluate(self, x):
        """Kernel value at point(s) x (last axis = coordinates)."""
        return self.radial(point_norm(x, self.d))

    def evaluate_scaled(self, h: float, y):
        """Dilated kernel Phi_h(y) = Phi(h y)."""
        if not h > 0:
            raise DomainError(f"Scale h must be positive, got {h}")
        return self.radial(h * point_norm(y, self.d))


def point_norm(x, d: int):
    """Euclidean norm over the last axis; plain numbers count as radii when d = 1."""
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        return np.abs(x)
    if x.shape[-1] != d:
        raise DomainError(f"Expected points with {d} coordinates, got shape {x.shape}")
    return np.sqrt(np.sum(x * x, axis=-1))


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


# ---------------------------------------------------------------------------
# Matern
# ---------------------------------------------------------------------------

def _matern_radial(spec: KernelSpec, r):
    r = np.asarray(r, dtype=float)
    return scaled_bessel_k(BesselOrder.from_nu(spec.nu), r)


def matern_eval(spec: KernelSpec, x):
    """Phi_{m,d}(x) = |x|^nu K_nu(|x|), continuous at 0 with value 2^(nu-1) Gamma(nu)."""
    _require_family(spec, KernelFamily.MATERN)
    return spec.evaluate(x)


def matern_scaled_eval(spec: KernelSpec, h: float, y):
    """Phi_h(y) = Phi(h y)."""
    _require_family(spec, KernelFamily.MATERN)
    return spec.evaluate_scaled(h, y)


@lru_cache(maxsize=None)
def _matern_decay_amplitude(m: int, d: int, alpha: float) -> float:
    spec = KernelSpec(KernelFamily.MATERN, m, d)
    r = np.linspace(0.0, C.DECAY_SAMPLE_RADIUS, C.DECAY_SAMPLE_COUNT)
    ratio = spec.radial(r) * np.exp(alpha * r)
    return float(np.max(ratio)) * (1.0 + 1e-9)


@lru_cache(maxsize=None)
def _compact_decay_amplitude(family: KernelFamily) -> float:
    m, d = _COMPACT_SHAPES[family]
    spec = KernelSpec(family, m, d)
    r = np.linspace(0.0, C.COMPACT_SUPPORT, C.DECAY_SAMPLE_COUNT)
    return float(np.max(np.abs(spec.radial(r)) * np.exp(r))) * (1.0 + 1e-9)


def panel_rule(edges, n: int = C.RADIAL_FT_NODES):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    x, w = roots_legendre(n)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def graded_edges(upper: float, unit: float = 1.0, levels: int = 20):
    """Panel edges refined geometrically towards 0, then panels of width `unit`."""
    small = unit * 2.0 ** -np.arange(levels, 0, -1)
    regular = np.arange(unit, upper, unit)
    return np.concatenate(([0.0], small, regular, [upper]))


def sphere_area(d: int) -> float:
    """Surface area |S^(d-1)| of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def matern_rho_closed_form(m: int, d: int) -> float:
    return (2.0 * math.pi) ** (d / 2) * 2.0 ** (m - 1) * math.gamma(m)


@lru_cache(maxsize=None)
def matern_rho(m: int, d: int) -> float:
    """Fourier normalisation rho with Phi^(xi) = rho (1 + |xi|^2)^(-m).

    Fourier transforms are unnormalised, Phi^(xi) = int Phi(x) e^(-i x.xi) dx,
    so rho = Phi^(0) = |S^(d-1)| int_0^inf Phi(t) t^(d-1) dt.

    Other conventions convert by a constant factor:
      * symmetric transform (2 pi)^(-d/2) int ...: divide by (2 pi)^(d/2),
        leaving 2^(m-1) Gamma(m);
      * (m, d) = (1, 1): rho = 2 sqrt(pi/2) = sqrt(2 pi) ~ 2.5066. The value pi
        sometimes quoted for this case is rho * sqrt(pi/2).
    """
    if 2 * m <= d:
        raise InvalidSpecError(f"Matern kernel needs 2m > d, got m={m}, d={d}")
    spec = KernelSpec(KernelFamily.MATERN, m, d)
    nodes, weights = panel_rule(graded_edges(C.DECAY_SAMPLE_RADIUS / C.DECAY_ALPHA))
    rho = sphere_area(d) * float(np.sum(weights * spec.radial(nodes) * nodes ** (d - 1)))
    log.debug(f"rho(m={m}, d={d}) = {rho!r}, closed form {matern_rho_closed_form(m, d)!r}")
    return rho


def matern_ft_profile(spec: KernelSpec, h: float) -> RadialProfile:
    """Fourier transform of Phi_h: rho h^(2m-d) (h^2 + r^2)^(-m)."""
    _require_family(spec, KernelFamily.MATERN)
    if not 0 < h <= 1:
        raise DomainError(f"Scale h must lie in (0, 1], got {h}")
    rho = matern_rho(spec.m, spec.d)
    scale = rho * h ** (2 * spec.m - spec.d)
    m = spec.m

    def profile(r):
        return scale * (h * h + np.asarray(r, dtype=float) ** 2) ** (-m)

    return RadialProfile(profile, spec.d, normalization_rho=rho,
                         name=f"ft:{spec.kernel_id}:h={h!r}")


def matern_spec(m: int, d: int, alpha: float = C.DECAY_ALPHA) -> KernelSpec:
    """Matern KernelSpec with a sampled decay amplitude C0 for rate alpha."""
    if 2 * m <= d:
        raise InvalidSpecError(f"Matern kernel needs 2m > d, got m={m}, d={d}")
    c0 = _matern_decay_amplitude(int(m), int(d), float(alpha))
    return KernelSpec(KernelFamily.MATERN, int(m), int(d), float(alpha), c0)


def compact_spec(family: KernelFamily | str) -> KernelSpec:
    family = KernelFamily(family)
    if family not in _COMPACT_SHAPES:
        raise InvalidSpecError(f"{family.value} is not a compactly supported family")
    m, d = _COMPACT_SHAPES[family]
    return KernelSpec(family, m, d, 1.0, _compact_decay_amplitude(family))


def m_harmonic_spec(m: int, d: int) -> KernelSpec:
    return KernelSpec(KernelFamily.M_HARMONIC, int(m), int(d))


@dataclass(frozen=True)
class DecayCertificate:
    alpha: float
    amplitude: float
    max_ratio: float
    sample_count: int

    @property
    def holds(self) -> bool:
        return self.max_ratio <= 1.0


def decay_certificate(spec: KernelSpec) -> DecayCertificate:
    """Check |Phi(r)| <= C0 e^(-alpha r) on sampled radii."""
    if spec.family == KernelFamily.M_HARMONIC:
        raise InvalidSpecError("The m-harmonic kernel does not decay")
    radius = spec.support_radius if spec.is_compact else C.DECAY_SAMPLE_RADIUS
    r = np.linspace(0.0, radius, C.DECAY_SAMPLE_COUNT)
    bound = spec.decay_amplitude_C0 * np.exp(-spec.decay_rate_alpha * r)
    ratio = float(np.max(np.abs(spec.radial(r)) / bound))
    return DecayCertificate(spec.decay_rate_alpha, spec.decay_amplitude_C0, ratio, r.size)


# ---------------------------------------------------------------------------
# m-harmonic limit kernel
# ---------------------------------------------------------------------------

def m_harmonic_radial(m: int, d: int, r):
    """|x|^(2m-d) ln|x| for even d, |x|^(2m-d) for odd d; 0 at the origin."""
    if 2 * m <= d:
        raise InvalidSpecError(f"m-harmonic kernel needs 2m > d, got m={m}, d={d}")
    r = np.asarray(r, dtype=float)
    power = r ** (2 * m - d)
    values = xlogy(power, r) if d % 2 == 0 else power
    return _scalar_or_array(values, r)


def m_harmonic_eval(m: int, d: int, x):
    return m_harmonic_radial(m, d, point_norm(x, d))


def _m_harmonic(spec: KernelSpec, r):
    return m_harmonic_radial(spec.m, spec.d, r)


# ---------------------------------------------------------------------------
# eta2, psi2, psi32
# ---------------------------------------------------------------------------

def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= 0)):
        raise DomainError("Profile argument must be non-negative")
    return t


def eta2_piece(t, piece: int, derivative: int = 0):
    """One analytic piece of eta2 (1 on (0,1], 2 on (1,2]) evaluated anywhere t > 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if piece == 1:
            if derivative == 0:
                v = 4 * LN2 + (LN2 - 3) * t ** 2 + 3 * xlogy(t ** 2, t)
            elif derivative == 1:
                v = (2 * LN2 - 3) * t + 6 * xlogy(t, t)
            elif derivative == 2:
                v = 2 * LN2 + 3 + 6 * np.log(t)
            else:
                raise DomainError("Only derivatives up to order 2 are available")
        elif piece == 2:
            if derivative == 0:
                v = (4 * LN2 - 4) - 4 * np.log(t) + (LN2 + 1) * t ** 2 - xlogy(t ** 2, t)
            elif derivative == 1:
                v = -4 / t + (2 * LN2 + 1) * t - 2 * xlogy(t, t)
            elif derivative == 2:
                v = 4 / t ** 2 + 2 * LN2 - 1 - 2 * np.log(t)
            else:
                raise DomainError("Only derivatives up to order 2 are available")
        else:
            raise DomainError(f"eta2 has pieces 1 and 2, got {piece}")
    return v / 3.0


_PSI2_PIECES = (
    Polynomial([8.0, 0.0, -24.0, 24.0, -7.0]),
    Polynomial([16.0, -32.0, 24.0, -8.0, 1.0]),  # (2 - t)^4
)
_PSI32_POLY_PIECE = Polynomial([48.0, -72.0, 28.0])
# second piece of psi32: 4(2-t)^3/t = 32/t + (-48 + 24t - 4t^2)
_PSI32_LAURENT = (32.0, Polynomial([-48.0, 24.0, -4.0]))


def psi2_piece(t, piece: int, derivative: int = 0):
    t = np.asarray(t, dtype=float)
    return _PSI2_PIECES[piece - 1].deriv(derivative)(t) if derivative else _PSI2_PIECES[piece - 1](t)


def psi32_piece(t, piece: int, derivative: int = 0):
    t = np.asarray(t, dtype=float)
    if piece == 1:
        poly = _PSI32_POLY_PIECE.deriv(derivative) if derivative else _PSI32_POLY_PIECE
        return poly(t)
    coeff, poly = _PSI32_LAURENT
    poly = poly.deriv(derivative) if derivative else poly
    sign = -1.0 if derivative % 2 else 1.0
    with np.errstate(divide="ignore"):
        return sign * math.factorial(derivative) * coeff / t ** (derivative + 1) + poly(t)


def _piecewise(t, piece_fn, derivative: int, origin_value=None):
    """Assemble a two-piece profile on [0,1], (1,2] with zero beyond 2."""
    t = _check_t(t)
    inner = t <= 1.0
    outer = (t > 1.0) & (t <= C.COMPACT_SUPPORT)
    values = np.zeros_like(t)
    if np.any(inner):
        values[inner] = piece_fn(t[inner], 1, derivative)
    if np.any(outer):
        values[outer] = piece_fn(t[outer], 2, derivative)
    if origin_value is not None:
        values = np.where(t == 0.0, origin_value, values)
    return _scalar_or_array(values, t)


def eta2_eval(t, derivative: int = 0):
    """eta2 profile; 4 ln2 / 3 at the origin, 0 beyond 2."""
    origin = {0: 4 * LN2 / 3, 1: 0.0, 2: -math.inf}.get(derivative)
    return _piecewise(t, eta2_piece, derivative, origin)


def psi2_eval(t, derivative: int = 0):
    """psi2(t) = 8 - 24t^2 + 24t^3 - 7t^4 on [0,1], (2-t)^4 on (1,2], 0 beyond."""
    return _piecewise(t, psi2_piece, derivative)


def psi32_eval(t, derivative: int = 0):
    """psi32 = -psi2'(t)/t: 48 - 72t + 28t^2 on [0,1], 4(2-t)^3/t on (1,2]."""
    return _piecewise(t, psi32_piece, derivative)


_COMPACT_EVALUATORS = {
    KernelFamily.ETA2: eta2_eval,
    KernelFamily.PSI2: psi2_eval,
    KernelFamily.PSI32: psi32_eval,
}

_COMPACT_PIECES = {
    KernelFamily.ETA2: eta2_piece,
    KernelFamily.PSI2: psi2_piece,
    KernelFamily.PSI32: psi32_piece,
}


def _compact_radial(spec: KernelSpec, r):
    return _COMPACT_EVALUATORS[spec.family](r)


@dataclass(frozen=True)
class KnotReport:
    """One-sided jumps of value, first and second derivative at a knot."""
    knot: float
    jumps: tuple[float, float, float]

    @property
    def max_jump(self) -> float:
        return max(abs(j) for j in self.jumps)


def knot_smoothness(family: KernelFamily | str) -> list[KnotReport]:
    """Compare one-sided limits at the knots 1 and 2 (outside the support the profile is 0)."""
    family = KernelFamily(family)
    piece_fn = _COMPACT_PIECES.get(family)
    if piece_fn is None:
        raise InvalidSpecError(f"{family.value} has no knots")
    reports = []
    for knot, left, right in ((1.0, 1, 2), (2.0, 2, None)):
        jumps = []
        for derivative in range(3):
            lhs = float(piece_fn(knot, left, derivative))
            rhs = 0.0 if right is None else float(piece_fn(knot, right, derivative))
            jumps.append(lhs - rhs)
        reports.append(KnotReport(knot, tuple(jumps)))
    return reports


# ---------------------------------------------------------------------------
# registry and ids
# ---------------------------------------------------------------------------

_REGISTRY = {
    KernelFamily.MATERN: _matern_radial,
    KernelFamily.M_HARMONIC: _m_harmonic,
    KernelFamily.ETA2: _compact_radial,
    KernelFamily.PSI2: _compact_radial,
    KernelFamily.PSI32: _compact_radial,
}

_ID_PATTERN = re.compile(r"^(matern|mharmonic)\s*:\s*m\s*=\s*(\d+)\s*,\s*d\s*=\s*(\d+)$")


def available_kernel_ids() -> list[str]:
    return ["matern:m=<m>,d=<d>", "mharmonic:m=<m>,d=<d>"] + [f.value for f in COMPACT_FAMILIES]


def parse_kernel_id(text: str) -> KernelSpec:
    """Turn a kernel id string into a KernelSpec."""
    key = str(text).strip().lower()
    match = _ID_PATTERN.match(key)
    if match:
        family, m, d = match.group(1), int(match.group(2)), int(match.group(3))
        if family == "matern":
            return matern_spec(m, d)
        return m_harmonic_spec(m, d)
    if key in {f.value for f in COMPACT_FAMILIES}:
        return compact_spec(key)
    raise InvalidSpecError(
        f"Unknown kernel id {text!r}. Supported: {', '.join(available_kernel_ids())}"
    )


def _require_family(spec: KernelSpec, family: KernelFamily):
    if spec.family != family:
        raise InvalidSpecError(f"Expected a {family.value} kernel, got {spec.kernel_id}")


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

def kernel_profile(spec: KernelSpec) -> RadialProfile:
    """RadialProfile of a kernel (for radial Fourier transforms)."""
    if spec.family == KernelFamily.M_HARMONIC:
        raise InvalidSpecError("The m-harmonic kernel is not integrable")
    if spec.is_compact:
        return RadialProfile(spec.radial, spec.d, spec.support_radius,
                             knots=(1.0, 2.0), name=spec.kernel_id)
    return RadialProfile(spec.radial, spec.d, normalization_rho=None,
                         name=spec.kernel_id, decay_rate=spec.decay_rate_alpha)


def unit_scaled_profile(family: KernelFamily | str) -> RadialProfile:
    """Rescaled profile with value 1 at the origin and support radius 1."""
    family = KernelFamily(family)
    if family == KernelFamily.ETA2:
        scale = 3.0 / (4.0 * LN2)
        fn = eta2_eval
    elif family == KernelFamily.PSI32:
        scale = 1.0 / 48.0
        fn = psi32_eval
    else:
        raise InvalidSpecError(f"No unit rescaling defined for {family.value}")
    m, d = _COMPACT_SHAPES[family]
    return RadialProfile(lambda t: scale * fn(2.0 * np.asarray(t, dtype=float)), d, 1.0,
                         knots=(0.5, 1.0), name=f"{family.value}_unit")

"""Bessel functions K_nu and J_nu for the orders the kernels need."""

import math
from dataclasses import dataclass

import numpy as np

from ..core import constants as C
from ..core.errors import DomainError, UnsupportedOrderError

EULER_GAMMA = 0.5772156649015329
CHUNK = 1 << 15


@dataclass(frozen=True)
class BesselOrder:
    """Bessel order stored as 2*nu so half-integer orders are exact."""
    twice_nu: int

    def __post_init__(self):
        if isinstance(self.twice_nu, bool) or not isinstance(self.twice_nu, (int, np.integer)):
            raise UnsupportedOrderError(f"twice_nu must be an integer, got {self.twice_nu!r}")
        if self.twice_nu < -1:
            raise UnsupportedOrderError(f"Order {self.twice_nu / 2} below -1/2 is not supported")

    @classmethod
    def from_nu(cls, nu: float) -> "BesselOrder":
        twice = 2.0 * float(nu)
        if abs(twice - round(twice)) > 1e-12:
            raise UnsupportedOrderError(f"Order {nu} is neither integer nor half-integer")
        return cls(int(round(twice)))

    @property
    def nu(self) -> float:
        return self.twice_nu / 2

    @property
    def is_half_integer(self) -> bool:
        return self.twice_nu % 2 == 1


def _as_order(order) -> BesselOrder:
    if isinstance(order, BesselOrder):
        return order
    return BesselOrder.from_nu(order)


def _as_array(z):
    """Return (float array, was_scalar)."""
    arr = np.asarray(z, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _finish(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


# ---------------------------------------------------------------------------
# K_nu
# ---------------------------------------------------------------------------

def _half_integer_coefficients(n: int) -> np.ndarray:
    """c_k = (n+k)! / (k! (n-k)! 2^k) of the closed form of K_{n+1/2}."""
    return np.array([
        math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k) * 2.0 ** k)
        for k in range(n + 1)
    ])


def _k_half_integer(n: int, z: np.ndarray) -> np.ndarray:
    coeffs = _half_integer_coefficients(n)
    poly = np.zeros_like(z)
    inv = 1.0 / z
    for c in coeffs[::-1]:
        poly = poly * inv + c
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * poly


def _k_series(n: int, z: np.ndarray, terms: int = 40) -> np.ndarray:
    """Log series of K_n for small z."""
    half = z / 2.0
    q = half * half
    log_half = np.log(half)

    # finite part: 1/2 (z/2)^-n sum_{k<n} (n-k-1)!/k! (-q)^k
    finite = np.zeros_like(z)
    for k in range(n):
        finite += math.factorial(n - k - 1) / math.factorial(k) * (-q) ** k
    finite *= 0.5 * half ** (-n)

    # I_n(z) and the digamma-weighted series
    i_sum = np.zeros_like(z)
    psi_sum = np.zeros_like(z)
    term = np.ones_like(z) / math.factorial(n)
    harmonic_k = 0.0
    harmonic_nk = sum(1.0 / j for j in range(1, n + 1))
    for k in range(terms):
        if k > 0:
            term = term * q / (k * (n + k))
            harmonic_k += 1.0 / k
            harmonic_nk += 1.0 / (n + k)
        i_sum += term
        psi = (-EULER_GAMMA + harmonic_k) + (-EULER_GAMMA + harmonic_nk)
        psi_sum += psi * term
    i_n = half ** n * i_sum

    sign = -1.0 if n % 2 else 1.0
    return finite - sign * log_half * i_n + sign * 0.5 * half ** n * psi_sum


def _k_trapezoid(nu: float, z: np.ndarray) -> np.ndarray:
    """Trapezoidal rule on K_nu(z) = int_0^inf exp(-z cosh s) cosh(nu s) ds."""
    step = C.K_TRAPEZOID_STEP
    z_min = float(np.min(z))
    s_max = math.acosh(1.0 + (45.0 + 6.0 * abs(nu)) / z_min)
    s = np.arange(0.0, s_max + step, step)
    weights = np.full(s.shape, step)
    weights[0] *= 0.5
    shift = np.cosh(s) - 1.0
    growth = np.cosh(nu * s) * weights
    out = np.empty_like(z)
    for start in range(0, z.size, CHUNK):
        block = z[start:start + CHUNK]
        out[start:start + CHUNK] = np.exp(-np.outer(block, shift)) @ growth
    return np.exp(-z) * out


def _k_asymptotic(nu: float, z: np.ndarray, terms: int = 40) -> np.ndarray:
    mu = 4.0 * nu * nu
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, terms):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        total += term
        if np.all(np.abs(term) < 1e-17 * np.abs(total)):
            break
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * total


def _k_integer(n: int, z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    small = z <= C.K_SERIES_MAX_Z
    large = z >= C.K_ASYMPTOTIC_MIN_Z
    middle = ~(small | large)
    if np.any(small):
        out[small] = _k_series(n, z[small])
    if np.any(middle):
        out[middle] = _k_trapezoid(float(n), z[middle])
    if np.any(large):
        out[large] = _k_asymptotic(float(n), z[large])
    return out


def bessel_k(order, z):
    """Modified Bessel function of the second kind K_nu(z).

    Args:
        order: BesselOrder or number; non-negative integer or positive half-integer
        z: Positive argument (scalar or array)

    Returns:
        K_nu(z), saturating to 0 where exp(-z) underflows
    """
    order = _as_order(order)
    if order.twice_nu < 0:
        raise UnsupportedOrderError(f"K_nu needs nu >= 0, got {order.nu}")
    z_arr, scalar = _as_array(z)
    if np.any(~(z_arr > 0)):
        raise DomainError("bessel_k requires z > 0")

    with np.errstate(under="ignore"):
        if order.is_half_integer:
            values = _k_half_integer(order.twice_nu // 2, z_arr)
        else:
            values = _k_integer(order.twice_nu // 2, z_arr)
    return _finish(values, scalar)


def scaled_bessel_k(order, z):
    """z^nu K_nu(z) for nu > 0, with the limit 2^(nu-1) Gamma(nu) at z = 0."""
    order = _as_order(order)
    if order.twice_nu <= 0:
        raise UnsupportedOrderError(f"z^nu K_nu(z) needs nu > 0, got {order.nu}")
    z_arr, scalar = _as_array(z)
    if np.any(~(z_arr >= 0)):
        raise DomainError("scaled_bessel_k requires z >= 0")

    nu = order.nu
    if order.is_half_integer:
        # sqrt(pi/2) e^-z sum_k c_k z^(n-k): no singular factor at 0
        n = order.twice_nu // 2
        coeffs = _half_integer_coefficients(n)
        poly = np.zeros_like(z_arr)
        for c in coeffs:
            poly = poly * z_arr + c
        with np.errstate(under="ignore"):
            values = math.sqrt(math.pi / 2.0) * np.exp(-z_arr) * poly
        return _finish(values, scalar)

    values = np.full_like(z_arr, 2.0 ** (nu - 1.0) * math.gamma(nu))
    positive = z_arr > 0
    if np.any(positive):
        zp = z_arr[positive]
        with np.errstate(under="ignore"):
            values[positive] = zp ** nu * _k_integer(order.twice_nu // 2, zp)
    return _finish(values, scalar)


# ---------------------------------------------------------------------------
# J_nu
# ---------------------------------------------------------------------------

def _j0_series(z: np.ndarray, terms: int = 30) -> np.ndarray:
    q = -(z * z) / 4.0
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, terms):
        term = term * q / (k * k)
        total += term
    return total


def _j0_trapezoid(z: np.ndarray) -> np.ndarray:
    # J0(z) = (1/2pi) int_0^2pi cos(z sin theta) dtheta, periodic integrand
    n = C.J0_TRAPEZOID_NODES
    sin_theta = np.sin(2.0 * np.pi * np.arange(n) / n)
    out = np.empty_like(z)
    for start in range(0, z.size, CHUNK):
        block = z[start:start + CHUNK]
        out[start:start + CHUNK] = np.cos(np.outer(block, sin_theta)).mean(axis=1)
    return out


def _j0_asymptotic(z: np.ndarray, terms: int = 40) -> np.ndarray:
    p = np.ones_like(z)
    q = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, terms):
        term = term * (-(2 * k - 1) ** 2) / (k * 8.0 * z)
        # even k feed P with sign (-1)^(k/2), odd k feed Q with sign (-1)^((k-1)/2)
        if k % 2 == 0:
            p += term * (-1.0) ** (k // 2)
        else:
            q += term * (-1.0) ** ((k - 1) // 2)
        if np.all(np.abs(term) < 1e-17):
            break
    phase = z - np.pi / 4.0
    return np.sqrt(2.0 / (np.pi * z)) * (p * np.cos(phase) - q * np.sin(phase))


def bessel_j(order, z):
    """Bessel function of the first kind J_nu(z) for nu in {-1/2, 0, 1/2}."""
    order = _as_order(order)
    if order.twice_nu not in (-1, 0, 1):
        raise UnsupportedOrderError(f"J_nu supports nu in (-1/2, 0, 1/2), got {order.nu}")
    z_arr, scalar = _as_array(z)
    if np.any(~(z_arr >= 0)):
        raise DomainError("bessel_j requires z >= 0")

    if order.twice_nu == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(z_arr > 0, np.sqrt(2.0 / (np.pi * z_arr)) * np.sin(z_arr), 0.0)
        return _finish(values, scalar)
    if order.twice_nu == -1:
        with np.errstate(divide="ignore"):
            values = np.sqrt(2.0 / (np.pi * z_arr)) * np.cos(z_arr)
        return _finish(values, scalar)

    values = np.empty_like(z_arr)
    small = z_arr <= C.J0_SERIES_MAX_Z
    large = z_arr > C.J0_ASYMPTOTIC_MIN_Z
    middle = ~(small | large)
    if np.any(small):
        values[small] = _j0_series(z_arr[small])
    if np.any(middle):
        values[middle] = _j0_trapezoid(z_arr[middle])
    if np.any(large):
        values[large] = _j0_asymptotic(z_arr[large])
    return _finish(values, scalar)

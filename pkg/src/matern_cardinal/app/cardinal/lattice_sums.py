"""Periodized algebraic sums  S(t) = sum_k (h^2 + |t + 2 pi k|^2)^(-m).

The sum over ||k||_inf <= K is taken directly. In d = 1 and d = 2 the
remaining exterior terms are replaced by the midpoint-rule continuum

    sum_ext g  ~  s^-d [ int_ext g  -  s^2/24 int_ext Laplace(g) ],

over the complement of the box t + [-L, L]^d, L = s (K + 1/2), where s is
the lattice spacing (2 pi unless a sub-lattice is summed). The
Laplacian integral is turned into a flux through the box boundary.
"""

import math

import numpy as np
from scipy.special import roots_legendre

from ..core import constants as C
from ..core.errors import DomainError, TruncationError
from ..kernels.kernels import panel_rule, sphere_area
from ..utils.logger import get_logger

log = get_logger("lattice_sums")

CELL = C.TWO_PI
HALF_LINE_NODES = 24
FACE_PANELS = 4
CHUNK_ENTRIES = 1 << 22

_s, _w = roots_legendre(HALF_LINE_NODES)
HALF_LINE_S = 0.5 * (_s + 1.0)
HALF_LINE_W = 0.5 * _w
FACE_X, FACE_W = panel_rule(np.linspace(0.0, 1.0, FACE_PANELS + 1))


def lattice_points(radius: int, d: int, exclude_origin: bool = False) -> np.ndarray:
    """Integer vectors k with ||k||_inf <= radius, shape (N, d)."""
    axis = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    if exclude_origin:
        points = points[np.any(points != 0, axis=1)]
    return points


def wrap_phase(t):
    """Map t componentwise into [-pi, pi)."""
    t = np.asarray(t, dtype=float)
    return (t + math.pi) % CELL - math.pi


def half_line_integral(b, c, p: float):
    """int_b^inf (c^2 + u^2)^(-p) du for b > 0, p > 1/2 (u = b/s substitution)."""
    b = np.asarray(b, dtype=float)[..., None]
    c = np.asarray(c, dtype=float)[..., None]
    s = HALF_LINE_S
    integrand = b * s ** (2 * p - 2) * (c * c * s * s + b * b) ** (-p)
    return integrand @ HALF_LINE_W


def _radial_derivative(u_i, u2, h: float, m: int):
    """Partial derivative of g along axis i, given u_i and |u|^2."""
    return -2.0 * m * u_i * (h * h + u2) ** (-m - 1)


def _tail_1d(t, h: float, m: int, K: int, cell: float):
    L = cell * (K + 0.5)
    b1, b2 = L + t, L - t
    exterior = half_line_integral(b1, h, m) + half_line_integral(b2, h, m)
    laplace = -(_radial_derivative(b1, b1 * b1, h, m) + _radial_derivative(b2, b2 * b2, h, m))
    return (exterior - cell ** 2 / 24.0 * laplace) / cell


def _tail_2d(t, h: float, m: int, K: int, cell: float):
    L = cell * (K + 0.5)
    lo, hi = t - L, t + L
    kappa = math.sqrt(math.pi) * math.gamma(m - 0.5) / math.gamma(m)

    # half planes u1 > hi1 and u1 < lo1, u2 integrated out
    exterior = kappa * (half_line_integral(hi[:, 0], h, m - 0.5)
                        + half_line_integral(-lo[:, 0], h, m - 0.5))

    # strips lo1 <= u1 <= hi1 with u2 beyond the box
    width = (hi[:, 0] - lo[:, 0])[:, None]
    u1 = lo[:, 0:1] + width * FACE_X[None, :]
    c = np.sqrt(h * h + u1 * u1)
    strips = (half_line_integral(np.broadcast_to(hi[:, 1:2], u1.shape), c, m)
              + half_line_integral(np.broadcast_to(-lo[:, 1:2], u1.shape), c, m))
    exterior = exterior + (strips * width) @ FACE_W

    # outward flux of grad g through the box boundary
    flux = np.zeros(t.shape[0])
    for i in range(2):
        j = 1 - i
        span = (hi[:, j] - lo[:, j])[:, None]
        along = lo[:, j:j + 1] + span * FACE_X[None, :]
        for face, sign in ((hi[:, i:i + 1], 1.0), (lo[:, i:i + 1], -1.0)):
            u2 = face * face + along * along
            flux += sign * (_radial_derivative(face, u2, h, m) * span) @ FACE_W
    laplace = -flux
    return (exterior - cell ** 2 / 24.0 * laplace) / cell ** 2


def tail_correction(t, h: float, m: int, K: int, cell: float = CELL):
    """Continuum estimate of the terms with ||k||_inf > K, t of shape (N, d), d <= 2."""
    t = np.asarray(t, dtype=float)
    if t.shape[1] == 1:
        return _tail_1d(t[:, 0], h, m, K, cell)
    if t.shape[1] == 2:
        return _tail_2d(t, h, m, K, cell)
    raise DomainError("Tail correction is available in d = 1 and d = 2")


def remainder_estimate(m: int, d: int, K: int, corrected: bool = True, cell: float = CELL) -> float:
    """Size of what the truncated (and corrected) sum still misses."""
    if corrected:
        R = cell * K
        order = 2 * m * (2 * m + 1) * (2 * m + 2) * (2 * m + 3)
        return (cell ** (4 - d) * 7.0 / 5760.0 * d * order * sphere_area(d)
                * R ** (d - 2 * m - 4) / (2 * m + 4 - d))
    R = cell * K - 0.5 * cell * math.sqrt(d)
    if R <= 0:
        return math.inf
    return cell ** (-d) * sphere_area(d) * R ** (d - 2 * m) / (2 * m - d)


def reference_scale(m: int, d: int, h: float) -> float:
    """Lower bound of S(t) on the cell, used to make the remainder relative."""
    return (h * h + d * math.pi ** 2) ** (-m)


def choose_radius(m: int, d: int, h: float, tol: float, cap: int = C.POISSON_CAP) -> tuple[int, float]:
    """Smallest K whose relative remainder estimate is below tol.

    Returns:
        (K, relative remainder estimate)
    """
    corrected = d <= 2
    scale = reference_scale(m, d, h)
    relative = lambda K: remainder_estimate(m, d, K, corrected) / scale
    at_cap = relative(cap)
    if at_cap >= tol:
        raise TruncationError(
            f"Lattice sum for d={d}, m={m} cannot reach tol={tol:g} within K <= {cap}",
            achieved=at_cap,
        )
    power = 2 * m + 4 - d if corrected else 2 * m - d
    guess = relative(1) / tol
    K = max(1, min(cap, int(math.ceil(guess ** (1.0 / power)))))
    while K > 1 and relative(K - 1) < tol:
        K -= 1
    while relative(K) >= tol:
        K += 1
    log.debug(f"Lattice sum radius K={K} (d={d}, m={m}, h={h:g}, tol={tol:g})")
    return K, relative(K)


def periodic_sum(t, h: float, m: int, K: int, exclude_origin: bool = False,
                 correct: bool | None = None, cell: float = CELL):
    """S(t) (or S(t) without k = 0) for points t of shape (N, d).

    The k = 0 term at t = 0, h = 0 is +inf.
    """
    t = np.atleast_2d(np.asarray(t, dtype=float))
    d = t.shape[1]
    correct = d <= 2 if correct is None else correct
    shifts = cell * lattice_points(K, d, exclude_origin).astype(float)
    out = np.empty(t.shape[0])
    step = max(1, CHUNK_ENTRIES // shifts.shape[0])
    with np.errstate(divide="ignore"):
        for start in range(0, t.shape[0], step):
            block = t[start:start + step]
            u = block[:, None, :] + shifts[None, :, :]
            u2 = np.einsum("nkd,nkd->nk", u, u)
            out[start:start + step] = np.sum((h * h + u2) ** (-m), axis=1)
    if correct:
        out = out + tail_correction(t, h, m, K, cell)
    return out

"""Scaled cardinal interpolation I_h f(x) = sum_j f(hj) chi_h(x - hj) on finite windows."""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import convolve

from ..cardinal.lagrange import DecayFit, LagrangeFunction
from ..core import constants as C
from ..core.errors import DomainError, OutOfWindowError
from ..kernels.kernels import KernelSpec, point_norm
from ..utils.logger import get_logger

log = get_logger("interpolation")


@dataclass(frozen=True)
class TestFunction:
    """Target function with its membership certificate for the smoothness class."""
    __test__ = False

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    admissible: bool
    certificate: str = ""

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))


def gaussian(d: int) -> TestFunction:
    def f(x):
        return np.exp(-point_norm(x, d) ** 2)
    return TestFunction("gaussian", f, True, "Fourier transform is a Gaussian")


def bump(d: int, radius: float = 1.0) -> TestFunction:
    """exp(-1 / (1 - |x/radius|^2)) inside the ball, 0 outside."""
    def f(x):
        r2 = (point_norm(x, d) / radius) ** 2
        inside = r2 < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            values = np.exp(-1.0 / np.where(inside, 1.0 - r2, 1.0))
        return np.where(inside, values, 0.0)
    return TestFunction("bump", f, True, "smooth with compact support, hence Schwartz class")


def kernel_combination(spec: KernelSpec, h: float, coefficients: dict) -> TestFunction:
    """s(x) = sum_j c_j Phi(x - hj), a member of the interpolation space."""
    items = [(np.atleast_1d(np.asarray(j, dtype=float)), float(c)) for j, c in coefficients.items()]

    def f(x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for j, c in items:
            shift = h * j if spec.d > 1 else h * j[0]
            total = total + c * spec.evaluate(x - shift)
        return total
    return TestFunction("kernel_combination", f, False, "finite combination of kernel translates")


def make_test_function(name: str, d: int, spec: KernelSpec | None = None, h: float | None = None) -> TestFunction:
    if name == "gaussian":
        return gaussian(d)
    if name == "bump":
        return bump(d)
    if name == "kernel_combination":
        if spec is None or h is None:
            raise DomainError("kernel_combination needs a kernel and a scale")
        coefficients = {(0,) * d: 1.0, (1,) + (0,) * (d - 1): -0.5, (-1,) + (0,) * (d - 1): 0.25}
        return kernel_combination(spec, h, coefficients)
    raise DomainError(f"Unknown test function {name!r}; use gaussian, bump or kernel_combination")


@dataclass(frozen=True)
class WindowConfig:
    """Evaluation region, error offsets and accuracy target of a study."""
    eval_radius: float = C.EVAL_RADIUS
    eval_tol: float = C.EVAL_TOL
    error_offsets: int = C.ERROR_OFFSETS
    decay_radius: int = C.DECAY_FIT_RADIUS


@dataclass(frozen=True, eq=False)
class DataWindow:
    """Samples f(hj) on the index box lower <= j <= lower + shape - 1."""
    h: float
    lower: tuple[int, ...]
    values: np.ndarray
    halo: int
    center: tuple[float, ...] = field(default=())
    radius: float = math.nan

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def upper(self) -> tuple[int, ...]:
        return tuple(lo + n - 1 for lo, n in zip(self.lower, self.values.shape))

    @classmethod
    def sample(cls, f, h: float, center, radius: float, halo: int) -> "DataWindow":
        """Sample f on lattice points hj within radius + halo steps of the center."""
        if not h > 0:
            raise DomainError(f"Scale h must be positive, got {h}")
        center = np.atleast_1d(np.asarray(center, dtype=float))
        lo = np.floor((center - radius) / h).astype(int) - halo
        hi = np.ceil((center + radius) / h).astype(int) + halo
        axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        points = h * np.stack(grids, axis=-1)
        d = center.size
        values = np.asarray(f(points if d > 1 else points[..., 0]), dtype=float)
        return cls(float(h), tuple(int(v) for v in lo), values, int(halo),
                   tuple(float(c) for c in center), float(radius))

    def central_indices(self) -> list[np.ndarray]:
        """Per axis, the base indices j0 whose full halo lies inside the window."""
        return [np.arange(lo + self.halo, lo + n - self.halo)
                for lo, n in zip(self.lower, self.values.shape)]


def halo_width(fit: DecayFit, tol: float) -> int:
    """W = ceil((log A + log(1/tol)) / B), at least 1."""
    if fit.finite_support:
        return max(1, int(math.ceil(fit.annulus[0])))
    W = (math.log(fit.envelope) + math.log(1.0 / tol)) / fit.rate
    return max(1, int(math.ceil(W)))


def truncation_bound(fit: DecayFit, W: int, d: int) -> float:
    """Bound on the dropped terms sum over ||n||_inf > W of |chi~(s + n)|.

    With s in [0, 1)^d every dropped point has |s + n| >= ||n||_inf - 1.
    """
    if fit.finite_support:
        return 0.0 if W >= fit.annulus[0] else math.inf
    n = np.arange(W + 1, W + 2 + int(math.ceil(60.0 / fit.rate)), dtype=float)
    shell = (2 * n + 1) ** d - (2 * n - 1) ** d
    with np.errstate(under="ignore"):
        return float(np.sum(shell * fit.envelope * np.exp(-fit.rate * (n - 1))))


def _check_inside(data: DataWindow, j0: np.ndarray):
    for axis, (lo, hi) in enumerate(zip(data.lower, data.upper)):
        if np.any(j0[..., axis] - data.halo < lo) or np.any(j0[..., axis] + data.halo > hi):
            raise OutOfWindowError("Evaluation point closer to the window edge than the halo")


def interpolate(L: LagrangeFunction, data: DataWindow, x):
    """I_h f(x) from the window samples, truncated to the halo around x."""
    d = L.d
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        lead = x.shape
    else:
        if x.shape[-1] != d:
            raise DomainError(f"Expected points with {d} coordinates, got shape {x.shape}")
        lead = x.shape[:-1]
    points = x.reshape(-1, d)
    y = points / data.h
    j0 = np.floor(y).astype(int)
    _check_inside(data, j0)
    W = data.halo

    out = np.empty(points.shape[0])
    for i, (base, offset) in enumerate(zip(j0, y - j0)):
        kernel = L.lattice_values(offset, W)
        start = base - W - np.array(data.lower)
        window = tuple(slice(s, s + 2 * W + 1) for s in start)
        # chi~(y - j) with j = base - n, so the samples are read in reverse
        samples = data.values[window][(slice(None, None, -1),) * d]
        out[i] = float(np.sum(samples * kernel))
    out = out.reshape(lead)
    return float(out) if out.ndim == 0 else out


def error_offsets(count: int, d: int) -> np.ndarray:
    """Offsets (2i+1)/(2 count) per axis, all combinations, shape (count^d, d)."""
    axis = (2 * np.arange(count) + 1) / (2.0 * count)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def interpolate_offsets(L: LagrangeFunction, data: DataWindow, offsets):
    """I_h f at x = h (j0 + s) for every offset s and every central j0.

    Returns:
        (x, values) with shapes (n_offsets, *central, d) and (n_offsets, *central)
    """
    d = L.d
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float)).reshape(-1, d)
    W = data.halo
    central = data.central_indices()
    grids = np.meshgrid(*central, indexing="ij")
    base = np.stack(grids, axis=-1).astype(float)
    xs, values = [], []
    for s in offsets:
        kernel = L.lattice_values(s, W)
        values.append(convolve(data.values, kernel, mode="valid"))
        xs.append(data.h * (base + s))
    return np.stack(xs), np.stack(values)

"""Sweeps over h: independent (kernel, h) cells run on a thread pool, merged in input order."""

import concurrent.futures as cf
from dataclasses import dataclass
from typing import Callable, Iterable, TypeVar

from ..cardinal.lagrange import DecayFit, LagrangeFunction, decay_uniformity, fit_decay
from ..kernels.kernels import KernelSpec
from ..utils.logger import get_logger
from .lebesgue import LebesgueEstimate, SamplingConfig, lebesgue_constant

log = get_logger("sweep")

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """[fn(item) for item in items], optionally on a thread pool; order is kept."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with cf.ThreadPoolExecutor(max_workers=threads) as executor:
        fs = [executor.submit(fn, item) for item in items]
        cf.wait(fs)
    return [f.result() for f in fs]


@dataclass(frozen=True)
class LebesgueSweep:
    estimates: tuple[LebesgueEstimate, ...]
    ratio_max: float
    bound: float

    @property
    def values(self) -> list[float]:
        return [e.value for e in self.estimates]

    @property
    def ratio(self) -> float:
        return max(self.values) / min(self.values)

    @property
    def uniform(self) -> bool:
        """Bounded by `bound` with max/min spread below `ratio_max`."""
        return max(self.values) <= self.bound and self.ratio < self.ratio_max


@dataclass(frozen=True)
class DecaySweep:
    fits: tuple[DecayFit, ...]
    min_rate: float
    amplitude_ratio_max: float

    @property
    def summary(self) -> dict:
        return decay_uniformity(list(self.fits))

    @property
    def uniform(self) -> bool:
        s = self.summary
        return s["min_rate"] >= self.min_rate and s["amplitude_ratio"] <= self.amplitude_ratio_max


def build_all(build: Callable[[KernelSpec, float], LagrangeFunction], spec: KernelSpec,
              h_list, threads: int = 1) -> list[LagrangeFunction]:
    return map_ordered(lambda h: build(spec, h), h_list, threads)


def lebesgue_sweep(functions: list[LagrangeFunction], sampling_cfg: SamplingConfig | None = None,
                   threads: int = 1, ratio_max: float = 2.0, bound: float = 10.0) -> LebesgueSweep:
    estimates = map_ordered(lambda L: lebesgue_constant(L, sampling_cfg), functions, threads)
    sweep = LebesgueSweep(tuple(estimates), ratio_max, bound)
    log.info(f"Lebesgue sweep over {len(estimates)} scales: max={max(sweep.values):.6f}, "
             f"ratio={sweep.ratio:.4f}, uniform={sweep.uniform}")
    return sweep


def decay_sweep(functions: list[LagrangeFunction], threads: int = 1,
                min_rate: float = 0.2, amplitude_ratio_max: float = 10.0) -> DecaySweep:
    fits = map_ordered(fit_decay, functions, threads)
    sweep = DecaySweep(tuple(fits), min_rate, amplitude_ratio_max)
    log.info(f"Decay sweep: {sweep.summary}, uniform={sweep.uniform}")
    return sweep

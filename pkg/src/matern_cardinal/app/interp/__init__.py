"""Scaled interpolation operator, Lebesgue constants and convergence studies."""

from .interpolation import (
    DataWindow,
    TestFunction,
    WindowConfig,
    gaussian,
    bump,
    kernel_combination,
    make_test_function,
    halo_width,
    interpolate,
    interpolate_offsets,
)
from .lebesgue import LebesgueEstimate, SamplingConfig, lebesgue_constant, random_operator_norm
from .studies import (
    ExperimentReport,
    convergence_study,
    compact_kernel_study,
    error_bound_check,
)
from .sweep import decay_sweep, lebesgue_sweep, map_ordered

"""Kernel families, special functions and radial Fourier transforms."""

from .kernels import (
    KernelFamily,
    KernelSpec,
    RadialProfile,
    parse_kernel_id,
    available_kernel_ids,
    matern_spec,
    compact_spec,
    m_harmonic_spec,
)
from .radial import PerturbationProfile, radial_ft, radial_ft_at_origin

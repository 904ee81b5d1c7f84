"""Cardinal symbols and Lagrange functions."""

from .symbol import Route, SymbolGrid, build_symbol, inverse_symbol, omega_ratio
from .lagrange import (
    LagrangeFunction,
    DecayFit,
    QuadratureConfig,
    lagrange_coefficients,
    lagrange_function,
    lagrange_eval,
    lagrange_eval_fourier,
    fit_decay,
)

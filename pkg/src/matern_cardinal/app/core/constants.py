"""Central table of numerical tolerances and caps."""

import math

EPS = 2.220446049250313e-16

# specfun
K_SERIES_MAX_Z = 2.0
K_ASYMPTOTIC_MIN_Z = 30.0
K_TRAPEZOID_STEP = 0.1
J0_SERIES_MAX_Z = 4.0
J0_ASYMPTOTIC_MIN_Z = 25.0
J0_TRAPEZOID_NODES = 128
# relative accuracy of integer-order K_nu across the series, trapezoid and asymptotic regimes
K_VALUE_RTOL = 1e-12

# kernels
DECAY_ALPHA = 0.9
DECAY_SAMPLE_COUNT = 10_000
DECAY_SAMPLE_RADIUS = 50.0
COMPACT_SUPPORT = 2.0
RADIAL_FT_NODES = 16
RADIAL_FT_PHASE_PER_PANEL = 2.0

# symbol
SYMBOL_TOL = 1e-11
DEFAULT_GRID = 64
SPATIAL_CAP = 4096
POISSON_CAP = 512
POISSON_ROUTE_MAX_H = 0.25
IMAG_TOL = 1e-13
# missing spatial terms alias straight into the Lagrange coefficients
SPATIAL_TAIL_MARGIN = 1e-3
SYNTHESIS_SAMPLES = 201

# lagrange
COEFF_TOL = 1e-12
MAX_GRID = 512
CARDINAL_TOL = 1e-8
CARDINAL_RADIUS = 5
# a doubling that does not halve the coefficient change has hit the symbol noise
ALIASING_STALL_RATIO = 0.5
NOISE_ACCEPT_FACTOR = 100.0
DECAY_FLOOR = 1e-13
DECAY_MIN_SAMPLES = 10
DECAY_R_MIN = 2.0
DECAY_FIT_RADIUS = 24
FOURIER_NODES = 24
FOURIER_PERIODS = 24
FOURIER_MAX_DENOMINATOR = 8
FOURIER_TOL = 1e-6

# interp
EVAL_TOL = 1e-10
LEBESGUE_SAMPLES = 33
LEBESGUE_REFINE_ROUNDS = 3
ERROR_OFFSETS = 7
EVAL_RADIUS = 3.0
ERROR_FLOOR_FACTOR = 100.0

TWO_PI = 2.0 * math.pi

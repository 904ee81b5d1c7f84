import math

import numpy as np
import pytest

from matern_cardinal.app.cardinal.lagrange import DecayFit, lagrange_function
from matern_cardinal.app.core.errors import DomainError, OutOfWindowError
from matern_cardinal.app.interp.interpolation import (
    DataWindow, WindowConfig, bump, error_offsets, gaussian, halo_width, interpolate,
    interpolate_offsets, kernel_combination, make_test_function, truncation_bound,
)
from matern_cardinal.app.interp.lebesgue import (
    LebesgueEstimate, SamplingConfig, lebesgue_constant, lebesgue_function,
    random_operator_norm, resolve_halo,
)
from matern_cardinal.app.interp.studies import (
    ExperimentReport, compact_kernel_study, convergence_study, error_bound_check, fit_slope,
)
from matern_cardinal.app.interp.sweep import build_all, decay_sweep, lebesgue_sweep, map_ordered
from matern_cardinal.app.kernels.kernels import compact_spec, matern_spec

SWEEP_SCALES = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]


# ---------------------------------------------------------------------------
# test functions and windows
# ---------------------------------------------------------------------------

def test_gaussian_and_bump():
    g = gaussian(2)
    assert g([0.0, 0.0]) == pytest.approx(1.0)
    assert g([1.0, 1.0]) == pytest.approx(math.exp(-2.0))
    b = bump(1)
    assert b(0.0) == pytest.approx(math.exp(-1.0))
    assert np.all(b(np.array([1.0, 1.5, -3.0])) == 0.0)
    assert g.admissible and b.admissible


def test_kernel_combination(matern21):
    s = kernel_combination(matern21, 0.5, {(0,): 2.0, (1,): -1.0})
    x = np.array([0.0, 0.7])
    expected = 2.0 * matern21.evaluate(x) - matern21.evaluate(x - 0.5)
    assert np.allclose(s(x), expected)
    assert not s.admissible


def test_make_test_function(matern22):
    assert make_test_function("gaussian", 2).name == "gaussian"
    assert make_test_function("kernel_combination", 2, matern22, 0.5).name == "kernel_combination"
    with pytest.raises(DomainError):
        make_test_function("kernel_combination", 2)
    with pytest.raises(DomainError):
        make_test_function("sine", 1)


def test_data_window_sample():
    data = DataWindow.sample(gaussian(2), 0.25, (0.0, 0.5), 1.0, 3)
    assert data.d == 2
    assert data.lower == (-7, -5)
    assert data.upper == (7, 9)
    assert data.values.shape == (15, 15)
    assert data.values[7, 5] == pytest.approx(1.0)
    central = data.central_indices()
    assert central[0][0] == -4 and central[0][-1] == 4
    with pytest.raises(DomainError):
        DataWindow.sample(gaussian(1), 0.0, 0.0, 1.0, 2)


def test_error_offsets():
    offsets = error_offsets(2, 2)
    assert offsets.shape == (4, 2)
    assert offsets.tolist() == [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]]


def test_halo_width_and_truncation_bound():
    fit = DecayFit(2.0, 0.5, 0.0, (2.0, 24.0), 100)
    W = halo_width(fit, 1e-10)
    assert W == math.ceil((math.log(2.0) + math.log(1e10)) / 0.5)
    bounds = [truncation_bound(fit, w, 2) for w in (10, 20, 40)]
    assert bounds[0] > bounds[1] > bounds[2] > 0

    finite = DecayFit(1.0, math.inf, 0.0, (2.0, 24.0), 0, finite_support=True)
    assert halo_width(finite, 1e-10) == 2
    assert truncation_bound(finite, 2, 1) == 0.0
    assert truncation_bound(finite, 1, 1) == math.inf


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

def test_interpolant_matches_data_at_lattice_points(lagrange21):
    f = gaussian(1)
    data = DataWindow.sample(f, lagrange21.h, 0.0, 2.0, 20)
    x = lagrange21.h * np.arange(-8, 9)
    assert np.allclose(interpolate(lagrange21, data, x), f(x), rtol=0, atol=1e-8)


def test_delta_data_reproduce_lagrange_function(lagrange21):
    h, W = lagrange21.h, 20
    data = DataWindow.sample(lambda x: np.where(np.abs(x) < 1e-12, 1.0, 0.0), h, 0.0, 2.0, W)
    x = np.linspace(-1.5, 1.5, 13)
    assert np.allclose(interpolate(lagrange21, data, x), lagrange21.scaled(x), rtol=0, atol=1e-10)


def test_interpolation_reproduces_the_kernel_span(lagrange21):
    h = lagrange21.h
    s = kernel_combination(lagrange21.spec, h, {(0,): 1.0, (3,): -0.5, (-2,): 0.25})
    data = DataWindow.sample(s, h, 0.0, 1.5, 60)
    x = np.linspace(-1.4, 1.4, 29)
    assert np.allclose(interpolate(lagrange21, data, x), s(x), rtol=0, atol=1e-8)


def test_interpolation_is_linear(lagrange22):
    h, W = lagrange22.h, 12
    f = DataWindow.sample(gaussian(2), h, (0.0, 0.0), 1.0, W)
    g = DataWindow.sample(bump(2, 2.0), h, (0.0, 0.0), 1.0, W)
    combined = DataWindow(h, f.lower, 2.0 * f.values - 3.0 * g.values, W)
    x = np.array([[0.1, 0.2], [-0.7, 0.45]])
    lhs = interpolate(lagrange22, combined, x)
    rhs = 2.0 * interpolate(lagrange22, f, x) - 3.0 * interpolate(lagrange22, g, x)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_interpolate_offsets_matches_pointwise(lagrange22):
    data = DataWindow.sample(gaussian(2), lagrange22.h, (0.0, 0.0), 1.0, 10)
    xs, values = interpolate_offsets(lagrange22, data, [[0.25, 0.5]])
    assert xs.shape[:-1] == values.shape
    assert values.shape == (1, 5, 5)
    assert np.allclose(values[0], interpolate(lagrange22, data, xs[0]), rtol=0, atol=1e-12)


def test_interpolation_outside_the_window(lagrange21):
    data = DataWindow.sample(gaussian(1), lagrange21.h, 0.0, 1.0, 10)
    with pytest.raises(OutOfWindowError):
        interpolate(lagrange21, data, 2.0)
    with pytest.raises(DomainError):
        interpolate(lagrange21, data, np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# Lebesgue constant
# ---------------------------------------------------------------------------

def test_sampling_config_validation():
    with pytest.raises(DomainError):
        SamplingConfig(samples=1)
    with pytest.raises(DomainError):
        SamplingConfig(refine_rounds=-1)


def test_lebesgue_function_at_lattice_points(lagrange21):
    assert lebesgue_function(lagrange21, 0.0, 10) == pytest.approx(1.0, abs=1e-7)


def test_lebesgue_constant_of_exponential_kernel(lagrange11):
    estimate = lebesgue_constant(lagrange11)
    assert estimate.value == pytest.approx(1.0, abs=1e-8)
    assert estimate.halo >= 2
    assert estimate.uncertainty < 1e-8


@pytest.mark.parametrize("name", ["lagrange21", "lagrange22"])
def test_lebesgue_constant_bounds_random_data(request, name):
    L = request.getfixturevalue(name)
    estimate = lebesgue_constant(L, SamplingConfig(samples=9, refine_rounds=2))
    assert isinstance(estimate, LebesgueEstimate)
    assert 1.0 <= estimate.value < 10.0
    assert all(0.0 <= y <= 0.5 for y in estimate.maximizer)
    lower = random_operator_norm(L, estimate.halo, trials=32)
    assert lower <= estimate.value + estimate.uncertainty + 1e-3
    assert estimate.to_dict()["halo"] == estimate.halo


def test_resolve_halo_meets_the_tolerance(lagrange21):
    W, tail = resolve_halo(lagrange21, 1e-10)
    assert W >= 1
    assert tail <= 1e-10


@pytest.mark.parametrize("name", ["lagrange21", "lagrange22"])
def test_translates_form_a_partition_of_unity(request, name):
    L = request.getfixturevalue(name)
    W, _ = resolve_halo(L, 1e-9)
    rng = np.random.default_rng(7)
    for y in rng.uniform(0.0, 1.0, size=(100, L.d)):
        assert float(np.sum(L.lattice_values(y, W))) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name", ["lagrange21", "lagrange22"])
def test_constants_are_reproduced(request, name):
    L = request.getfixturevalue(name)
    W, _ = resolve_halo(L, 1e-9)
    d = L.d
    data = DataWindow.sample(lambda x: np.ones(x.shape[:-1] if d > 1 else x.shape), L.h,
                             np.zeros(d), 1.0, W)
    x = np.random.default_rng(3).uniform(-1.0, 1.0, size=(20, d))
    values = interpolate(L, data, x if d > 1 else x[:, 0])
    assert np.allclose(values, 1.0, atol=1e-6)


# ---------------------------------------------------------------------------
# sweeps and studies
# ---------------------------------------------------------------------------

def test_map_ordered_keeps_order():
    items = list(range(20))
    assert map_ordered(lambda i: i * i, items, threads=4) == [i * i for i in items]
    assert map_ordered(str, [], threads=4) == []


def test_fit_slope():
    h = [0.5, 0.25, 0.125, 0.0625]
    errors = [3.0 * v ** 4 for v in h]
    slope, used, dropped = fit_slope(h, errors, floor=0.0)
    assert slope == pytest.approx(4.0)
    assert used == 4 and dropped == []
    slope, used, dropped = fit_slope(h, errors, floor=1e-2)
    assert used == 2 and dropped == [0.125, 0.0625]
    slope, used, _ = fit_slope(h, errors, floor=1.0)
    assert math.isnan(slope) and used == 0


def test_experiment_report_files():
    report = ExperimentReport("converge", "matern:m=2,d=1", "matern", 1, 2, "gaussian", [0.5],
                              rows=[{"h": 0.5, "error": 1e-3}])
    assert report.filename("csv") == "matern_1d_m2_converge.csv"
    row = next(report.csv_rows())
    assert row[:2] == [0.5, 1e-3]
    assert math.isnan(row[2])
    assert report.to_dict()["study"] == "converge"


def test_convergence_rate_m1(matern11):
    report = convergence_study(matern11, gaussian(1), [0.25, 0.125, 0.0625],
                               sampling_cfg=SamplingConfig(samples=9, refine_rounds=1))
    assert report.slope_defined
    assert report.slope == pytest.approx(2.0, abs=0.3)
    assert all(row["lebesgue"] == pytest.approx(1.0, abs=1e-6) for row in report.rows)
    assert report.rows[1]["ratio"] == pytest.approx(4.0, rel=0.2)


@pytest.mark.slow
def test_convergence_rate_m2(matern21):
    report = convergence_study(matern21, gaussian(1), [0.25, 0.125, 0.0625],
                               sampling_cfg=SamplingConfig(samples=9, refine_rounds=1), threads=3)
    assert report.slope == pytest.approx(4.0, abs=0.5)
    assert [row["h"] for row in report.rows] == [0.25, 0.125, 0.0625]


def test_study_scales_must_decrease(matern11):
    with pytest.raises(DomainError):
        convergence_study(matern11, gaussian(1), [0.125, 0.25])
    with pytest.raises(DomainError):
        convergence_study(matern11, gaussian(1), [2.0, 0.5])


def test_compact_kernel_study():
    spec = compact_spec("psi2")
    report = compact_kernel_study(spec, gaussian(1), [0.5, 0.25],
                                  sampling_cfg=SamplingConfig(samples=9, refine_rounds=1))
    assert report.study == "compact"
    assert [row["spatial_terms"] for row in report.rows] == [9, 17]
    assert all(row["route"] == "spatial" for row in report.rows)
    assert report.errors[1] < report.errors[0]


def test_compact_kernel_study_rejects_matern(matern11):
    with pytest.raises(DomainError):
        compact_kernel_study(matern11, gaussian(1), [0.5])


def test_error_bound_check(lagrange11):
    check = error_bound_check(lagrange11, gaussian(1), WindowConfig(eval_radius=2.0),
                              SamplingConfig(samples=9, refine_rounds=1))
    assert check.error > 0
    assert check.distance > 0
    assert check.holds


@pytest.mark.slow
@pytest.mark.parametrize("m,d", [(1, 1), (2, 1), (2, 2)])
def test_sweeps_are_uniform_in_h(m, d):
    functions = build_all(lagrange_function, matern_spec(m, d), SWEEP_SCALES, threads=3)
    lebesgue = lebesgue_sweep(functions, SamplingConfig(samples=9, refine_rounds=1), threads=3)
    assert lebesgue.uniform
    assert lebesgue.ratio <= 2.0 and max(lebesgue.values) <= 10.0
    assert [e.h for e in lebesgue.estimates] == SWEEP_SCALES
    decay = decay_sweep(functions, threads=3)
    assert decay.uniform
    assert decay.summary["count"] == len(SWEEP_SCALES)
    if m > 1:
        assert decay.summary["min_rate"] >= 0.2
        assert decay.summary["amplitude_ratio"] <= 10.0


@pytest.mark.slow
def test_convergence_rate_in_two_dimensions(matern22):
    report = convergence_study(matern22, gaussian(2), [0.5, 0.25, 0.125, 0.0625, 0.03125],
                               sampling_cfg=SamplingConfig(samples=9, refine_rounds=1), threads=3)
    assert report.slope_defined
    assert report.slope == pytest.approx(4.0, abs=0.5)


@pytest.mark.slow
def test_compact_kernel_rate_in_two_dimensions(eta2):
    report = compact_kernel_study(eta2, gaussian(2), [0.5, 0.25, 0.125, 0.0625],
                                  sampling_cfg=SamplingConfig(samples=9, refine_rounds=1), threads=3)
    assert report.slope_defined
    assert report.slope >= 3.6

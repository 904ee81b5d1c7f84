import math

import numpy as np
import pytest

from matern_cardinal.app.cardinal.symbol import (
    Route, build_symbol, omega_ratio, reflect, spatial_radius, symbol_poisson,
    symbol_spatial, synthesis_condition,
)
from matern_cardinal.app.core.errors import (
    DomainError, InvalidSpecError, RouteInfeasibleError, TruncationError,
)
from matern_cardinal.app.kernels.kernels import compact_spec, m_harmonic_spec, matern_spec

EPS = np.finfo(float).eps
ACCEPTANCE_SCALES = [1.0, 0.5, 0.25, 0.125, 0.0625]


@pytest.mark.parametrize("m,d,h", [(1, 1, 0.25), (2, 1, 0.5), (3, 1, 0.5), (2, 2, 0.25)])
def test_routes_agree(m, d, h):
    spec = matern_spec(m, d)
    M = 16
    spatial = symbol_spatial(spec, h, M)
    poisson = symbol_poisson(spec, h, M)
    assert np.allclose(spatial.values, poisson.values, rtol=1e-9, atol=0)


def _acceptance_cases():
    for m, d in [(1, 1), (2, 1), (3, 1), (2, 2), (3, 2)]:
        for h in ACCEPTANCE_SCALES:
            marks = [pytest.mark.slow] if d == 2 and h < 0.25 else []
            yield pytest.param(m, d, h, marks=marks, id=f"m{m}-d{d}-h{h}")


@pytest.mark.parametrize("m,d,h", _acceptance_cases())
def test_routes_agree_on_the_acceptance_grid(m, d, h):
    spec = matern_spec(m, d)
    spatial = symbol_spatial(spec, h, 64)
    poisson = symbol_poisson(spec, h, 64)
    # the FFT of the folded coefficients loses eps * sigma(0) per butterfly level
    rounding = 8 * EPS * float(spatial.values.flat[0]) * math.log2(spatial.values.size)
    # the poisson remainder estimate is relative, the spatial tail absolute
    rtol = 1e-9 + poisson.tail_bound
    atol = spatial.tail_bound + rounding
    assert np.all(np.abs(spatial.values - poisson.values) <= rtol * np.abs(poisson.values) + atol)


@pytest.mark.parametrize("route", ["spatial", "poisson"])
@pytest.mark.parametrize("h", ACCEPTANCE_SCALES)
def test_exponential_symbol_closed_form(matern11, route, h):
    grid = build_symbol(matern11, h, 64, route=route)
    t = grid.nodes()[..., 0]
    expected = math.sqrt(math.pi / 2) * math.sinh(h) / (math.cosh(h) - np.cos(t))
    assert np.allclose(grid.values, expected, rtol=1e-9, atol=0)



@pytest.mark.parametrize("route", ["spatial", "poisson"])
def test_symbol_is_even_and_positive(matern22, route):
    grid = build_symbol(matern22, 0.25, 16, route=route)
    assert grid.route == Route(route)
    assert grid.max_symmetry_defect() == 0.0
    assert np.all(grid.values > 0)


def test_inverse_symbol(matern21):
    grid = build_symbol(matern21, 0.5, 32)
    assert np.allclose(grid.omega * grid.values, grid.scale)
    assert grid.scale == pytest.approx(grid.rho * 0.5 ** 3)


def test_compact_symbol_is_an_exact_finite_sum(eta2):
    h = 0.5
    K, tail = spatial_radius(eta2, h, 1e-11, 4096)
    assert K == math.ceil(2 / h)
    assert tail == 0.0
    assert (2 * K + 1) ** eta2.d == 81
    grid = build_symbol(eta2, h, 16)
    # the mean over the grid picks the k = 0 Fourier coefficient
    assert np.mean(grid.values) == pytest.approx(float(eta2.radial(0.0)), rel=1e-12)


@pytest.mark.parametrize("family", ["eta2", "psi2", "psi32"])
def test_compact_symbols_are_positive(family):
    grid = build_symbol(compact_spec(family), 0.5, 16)
    assert grid.route == Route.SPATIAL
    assert np.min(grid.values) > 0


def test_poisson_symbol_at_h_zero(matern21):
    grid = build_symbol(matern21, 0.0, 16, route="poisson")
    assert grid.values[0] == math.inf
    assert grid.omega[0] == 0.0
    assert np.all(np.isfinite(grid.omega))
    assert grid.scale == 1.0


def test_default_routes(matern21):
    assert build_symbol(matern21, 1.0, 8).route == Route.SPATIAL
    assert build_symbol(matern21, 0.125, 8).route == Route.POISSON
    assert build_symbol(matern_spec(2, 3), 0.5, 8).route == Route.SPATIAL


def test_poisson_route_is_infeasible_in_three_dimensions():
    with pytest.raises(TruncationError):
        symbol_poisson(matern_spec(2, 3), 0.5, 8)


def test_spatial_route_cap(matern21):
    with pytest.raises(RouteInfeasibleError):
        symbol_spatial(matern21, 0.01, 16, cap=10)


@pytest.mark.parametrize("spec,route", [
    (m_harmonic_spec(2, 2), "spatial"),
    (compact_spec("eta2"), "poisson"),
])
def test_unsupported_kernels(spec, route):
    with pytest.raises(InvalidSpecError):
        build_symbol(spec, 0.5, 8, route=route)


@pytest.mark.parametrize("h,M", [(0.0, 8), (1.5, 8), (0.5, 7)])
def test_argument_checks(matern21, h, M):
    with pytest.raises(DomainError):
        symbol_spatial(matern21, h, M)


def test_reflect():
    values = np.arange(16.0).reshape(4, 4)
    mirrored = reflect(values)
    assert mirrored[1, 2] == values[3, 2]
    assert mirrored[0, 0] == values[0, 0]
    assert np.array_equal(reflect(mirrored), values)


def test_table_rows(matern21):
    grid = build_symbol(matern21, 0.5, 8)
    rows = list(grid.table_rows())
    assert len(rows) == 8
    assert grid.table_header() == ["t1", "sigma", "omega", "tail_bound"]
    assert rows[0][0] == 0.0
    assert rows[0][1] == pytest.approx(grid.values[0])
    assert grid.metadata()["route"] == "spatial"


def test_omega_ratio(matern21):
    assert omega_ratio(matern21, 0.0, 0.0) == pytest.approx(1.0)
    t = np.linspace(-math.pi, math.pi, 9)
    ratio = omega_ratio(matern21, t, 0.25)
    assert np.all((ratio > 0) & (ratio <= 1))
    assert ratio == pytest.approx(ratio[::-1])
    with pytest.raises(DomainError):
        omega_ratio(matern21, 4.0, 0.25)


@pytest.mark.parametrize("h", [1.0, 0.5, 0.25, 0.125])
def test_synthesis_condition_holds(matern21, h):
    result = synthesis_condition(matern21, h, 0.5)
    assert result.holds
    assert result.measured_sup > 0


def test_synthesis_condition_rejects_large_delta(matern21):
    with pytest.raises(DomainError):
        synthesis_condition(matern21, 0.5, math.pi)


@pytest.mark.parametrize("m,d", [(1, 1), (2, 1), (2, 2)])
def test_synthesis_sup_scales_like_h_to_the_2m(m, d):
    spec = matern_spec(m, d)
    ratios = [synthesis_condition(spec, h, 0.5).measured_sup / h ** (2 * m) for h in ACCEPTANCE_SCALES]
    assert max(ratios) / min(ratios) < 1.2

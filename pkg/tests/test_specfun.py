import math

import numpy as np
import pytest
from scipy import special

from matern_cardinal.app.core.errors import DomainError, UnsupportedOrderError
from matern_cardinal.app.kernels.specfun import BesselOrder, bessel_j, bessel_k, scaled_bessel_k

Z = np.concatenate((np.geomspace(1e-6, 1.99, 40), np.linspace(2.0, 29.9, 60), np.linspace(30.0, 300.0, 30)))
SWITCH_POINTS = [2.0, 4.0, 25.0, 30.0]
NEAR_SWITCHES = np.array([z + dz for z in SWITCH_POINTS for dz in (-1e-3, 0.0, 1e-3)])


@pytest.mark.parametrize("nu", [0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5])
def test_bessel_k_matches_scipy(nu):
    expected = special.kv(nu, Z)
    values = bessel_k(nu, Z)
    finite = expected > 1e-300
    assert np.allclose(values[finite], expected[finite], rtol=1e-12, atol=0)


@pytest.mark.parametrize("nu", [1, 2, 1.5, 2.5])
def test_bessel_k_recurrence(nu):
    z = np.concatenate((NEAR_SWITCHES, [0.3, 1.0, 10.0, 60.0]))
    lhs = bessel_k(nu + 1, z)
    rhs = bessel_k(nu - 1, z) + (2 * nu / z) * bessel_k(nu, z)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


@pytest.mark.parametrize("nu", [0, 1, 2, 3, 0.5, 2.5])
def test_bessel_k_is_decreasing(nu):
    z = np.unique(np.concatenate((np.linspace(0.05, 100.0, 2000), NEAR_SWITCHES)))
    assert np.all(np.diff(bessel_k(nu, z)) < 0)


@pytest.mark.parametrize("nu", [0, 1, 2])
@pytest.mark.parametrize("z", SWITCH_POINTS)
def test_bessel_k_at_switch_points(nu, z):
    for value in (z - 1e-9, z, z + 1e-9):
        assert bessel_k(nu, value) == pytest.approx(special.kv(nu, value), rel=1e-12)


@pytest.mark.parametrize("z", SWITCH_POINTS)
def test_bessel_j0_at_switch_points(z):
    for value in (z - 1e-9, z, z + 1e-9):
        assert bessel_j(0, value) == pytest.approx(special.j0(value), abs=1e-14)


@pytest.mark.parametrize("zero", [2.404825557695773, 5.520078110286311, 8.653727912911013, 30.634606468431975])
def test_bessel_j0_vanishes_at_its_zeros(zero):
    assert abs(bessel_j(0, zero)) < 1e-14


def test_bessel_k_half_order_closed_form():
    z = np.linspace(0.1, 20.0, 50)
    assert np.allclose(bessel_k(0.5, z), np.sqrt(np.pi / (2 * z)) * np.exp(-z), rtol=1e-14)


def test_bessel_k_underflows_to_zero():
    assert bessel_k(0, 800.0) == 0.0


@pytest.mark.parametrize("nu", [0.5, 1, 1.5, 2, 3])
def test_scaled_bessel_k_limit_at_zero(nu):
    assert scaled_bessel_k(nu, 0.0) == pytest.approx(2 ** (nu - 1) * math.gamma(nu), rel=1e-14)


@pytest.mark.parametrize("nu", [0.5, 1, 2.5])
def test_scaled_bessel_k_matches_scipy(nu):
    z = np.linspace(0.01, 40.0, 200)
    assert np.allclose(scaled_bessel_k(nu, z), z ** nu * special.kv(nu, z), rtol=1e-12)


def test_bessel_j0_matches_scipy():
    z = np.concatenate((np.linspace(0.0, 4.0, 50), np.linspace(4.0, 127.0, 300), np.linspace(128.0, 2000.0, 100)))
    assert np.allclose(bessel_j(0, z), special.j0(z), rtol=0, atol=1e-14)


@pytest.mark.parametrize("nu", [-0.5, 0.5])
def test_bessel_j_half_orders(nu):
    z = np.linspace(0.1, 50.0, 100)
    assert np.allclose(bessel_j(nu, z), special.jv(nu, z), rtol=0, atol=1e-14)


def test_scalar_in_scalar_out():
    assert isinstance(bessel_k(1, 1.0), float)
    assert isinstance(bessel_j(0, 1.0), float)


def test_order_from_nu():
    order = BesselOrder.from_nu(1.5)
    assert order.twice_nu == 3
    assert order.is_half_integer
    assert order.nu == 1.5


@pytest.mark.parametrize("call", [
    lambda: bessel_k(0.3, 1.0),
    lambda: bessel_j(1, 1.0),
    lambda: scaled_bessel_k(0, 1.0),
    lambda: BesselOrder(-3),
])
def test_unsupported_orders(call):
    with pytest.raises(UnsupportedOrderError):
        call()


@pytest.mark.parametrize("call", [
    lambda: bessel_k(1, 0.0),
    lambda: bessel_k(1, -1.0),
    lambda: scaled_bessel_k(1, -0.5),
    lambda: bessel_j(0, -1.0),
])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()

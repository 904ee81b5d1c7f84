import math

import numpy as np
import pytest
from scipy import special

from matern_cardinal.app.core.errors import DomainError, InvalidProfileError, InvalidSpecError
from matern_cardinal.app.kernels.kernels import (
    RadialProfile, compact_spec, kernel_profile, m_harmonic_spec, matern_rho, matern_spec,
)
from matern_cardinal.app.kernels.radial import (
    bessel_basis, fit_perturbation, radial_ft, radial_ft_at_origin, radial_ft_error, sobolev_bounds,
)

DELTA = 144.0 * math.sqrt(2.0 / math.pi)
R = np.linspace(1.0, 20.0, 39)


def eta2_transform(r):
    return 4.0 / r ** 4 * (1 - 4.0 / 3.0 * special.j0(r) + 1.0 / 3.0 * special.j0(2 * r))


def psi2_transform(r):
    return DELTA / r ** 4 * (1 - 4.0 / 3.0 * np.sin(r) / r + 1.0 / 6.0 * np.sin(2 * r) / r)


@pytest.mark.parametrize("m,d", [(1, 1), (2, 1), (2, 2), (2, 3), (3, 2)])
def test_matern_transform_is_algebraic(m, d):
    spec = matern_spec(m, d)
    r = np.array([0.0, 0.5, 1.0, 2.5, 6.0])
    expected = matern_rho(m, d) / (2 * math.pi) ** (d / 2) * (1 + r ** 2) ** -m
    assert np.allclose(radial_ft(kernel_profile(spec), d, r), expected, rtol=1e-9)


def test_gaussian_is_its_own_transform():
    profile = RadialProfile(lambda t: np.exp(-t * t / 2), 2, decay_rate=0.1, name="gauss")
    r = np.linspace(0.0, 5.0, 11)
    assert np.allclose(radial_ft(profile, 2, r), np.exp(-r * r / 2), atol=1e-12)


def test_eta2_transform_closed_form(eta2):
    assert np.allclose(radial_ft(kernel_profile(eta2), 2, R), eta2_transform(R), rtol=0, atol=1e-10)


def test_eta2_transform_at_origin(eta2):
    assert radial_ft_at_origin(kernel_profile(eta2), 2) == pytest.approx(0.25, rel=1e-10)
    assert radial_ft(kernel_profile(eta2), 2, 0.0) == pytest.approx(0.25, rel=1e-10)


def test_psi2_transform_closed_form():
    profile = kernel_profile(compact_spec("psi2"))
    assert np.allclose(radial_ft(profile, 1, R), psi2_transform(R), rtol=0, atol=1e-10)
    assert radial_ft_at_origin(profile, 1) == pytest.approx(DELTA / 30.0, rel=1e-12)


def test_radial_ft_error_estimate(eta2):
    profile = kernel_profile(eta2)
    error = radial_ft_error(profile, 2, R)
    actual = np.abs(radial_ft(profile, 2, R) - eta2_transform(R))
    assert error.shape == R.shape
    assert np.all(error < 1e-8)
    assert np.all(actual <= error + 1e-12)


@pytest.mark.parametrize("m,d", [(2, 1), (2, 2)])
def test_radial_ft_error_of_matern_transform(m, d):
    r = np.array([0.0, 1.0, 4.0])
    error = radial_ft_error(kernel_profile(matern_spec(m, d)), d, r)
    expected = matern_rho(m, d) / (2 * math.pi) ** (d / 2) * (1 + r ** 2) ** -m
    actual = np.abs(radial_ft(kernel_profile(matern_spec(m, d)), d, r) - expected)
    assert np.all(error < 1e-8)
    assert np.all(actual < 1e-8)


def test_dimension_walk():
    psi32 = kernel_profile(compact_spec("psi32"))
    psi2 = kernel_profile(compact_spec("psi2"))
    r = np.linspace(0.0, 15.0, 31)
    assert np.allclose(radial_ft(psi32, 3, r), radial_ft(psi2, 1, r), rtol=0, atol=1e-10)


@pytest.mark.parametrize("family,d", [("eta2", 2), ("psi2", 1), ("psi32", 3)])
def test_compact_transforms_are_positive(family, d):
    profile = kernel_profile(compact_spec(family))
    r = np.linspace(0.0, 40.0, 161)
    assert np.all(radial_ft(profile, d, r) > 0)


def test_sobolev_bounds_are_positive(eta2):
    lower, upper = sobolev_bounds(kernel_profile(eta2), 2, np.linspace(0.1, 30.0, 100))
    assert 0 < lower <= upper


def test_fit_perturbation_recovers_eta2_form(eta2):
    fit = fit_perturbation(kernel_profile(eta2), 2, 2, (1.0, 2.0), prefactor=4.0)
    assert fit.coefficients == pytest.approx((-4.0 / 3.0, 1.0 / 3.0), abs=1e-7)
    assert fit.residual < 1e-8
    assert fit.limit_beta == pytest.approx(0.25, rel=1e-10)
    assert fit.is_positive(np.linspace(0.5, 30.0, 300))


def test_fit_perturbation_with_free_prefactor():
    profile = kernel_profile(compact_spec("psi2"))
    fit = fit_perturbation(profile, 3, 2, (1.0, 2.0))
    assert fit.prefactor == pytest.approx(DELTA, rel=1e-7)
    c = math.sqrt(math.pi / 2.0)
    assert fit.coefficients == pytest.approx((-4.0 / 3.0 * c, 1.0 / 3.0 * c), abs=1e-6)


def test_perturbation_profile_evaluate(eta2):
    fit = fit_perturbation(kernel_profile(eta2), 2, 2, (1.0, 2.0), prefactor=4.0)
    r = np.array([0.0, 2.0, 5.0])
    values = fit.evaluate(r)
    assert values[0] == pytest.approx(0.25)
    assert values[1:] == pytest.approx(eta2_transform(r[1:]), abs=1e-8)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_bessel_basis_at_zero(d):
    expected = {1: math.sqrt(2 / math.pi), 2: 1.0, 3: math.sqrt(2 / math.pi)}[d]
    assert float(bessel_basis(d, 0.0)) == pytest.approx(expected)
    assert float(bessel_basis(d, 1e-9)) == pytest.approx(expected)


def test_unsupported_dimension():
    with pytest.raises(InvalidProfileError):
        radial_ft(kernel_profile(matern_spec(3, 4)), 4, 1.0)


def test_negative_radius_rejected(eta2):
    with pytest.raises(DomainError):
        radial_ft(kernel_profile(eta2), 2, [-1.0])


def test_non_decaying_profile_rejected():
    with pytest.raises(InvalidProfileError):
        radial_ft(RadialProfile(np.cos, 1), 1, 1.0)
    with pytest.raises(InvalidSpecError):
        kernel_profile(m_harmonic_spec(2, 2))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from scriholo.discretization import UGrid, field_from_function, make_sphere_grid
from scriholo.errors import GridMismatch, NonGaussianTerm
from scriholo.holography import BulkSource, One, auto_ugrid, upsilon
from scriholo.one_particle import (HalfLineProfile, beta, boundary_ip, boundary_norm2, complex_ip,
                                   epsilon_kernel_limit, kg_momentum_norm, real_ip, richardson,
                                   sigma_boundary)

GRID = UGrid(-16.0, 16.0, 1024)


def gauss(a=0.0, s=1.0, amp=1.0):
    return HalfLineProfile.from_function(GRID, lambda u: amp * np.exp(-0.5 * ((u - a) / s) ** 2))


def test_beta_closed_form():
    # 1/2 integral f' h for f = exp(-(u-a)^2), h = exp(-u^2)
    a = 0.8
    f = HalfLineProfile.from_function(GRID, lambda u: np.exp(-((u - a) ** 2)))
    h = HalfLineProfile.from_function(GRID, lambda u: np.exp(-(u**2)))
    expected = 0.5 * a * np.exp(-0.5 * a * a) * np.sqrt(np.pi / 2.0)
    assert beta(f, h) == pytest.approx(expected, rel=1e-6)


def test_beta_antisymmetric_and_zero_on_diagonal():
    f, h = gauss(0.3, 0.8), gauss(-0.5, 1.2)
    assert beta(f, h) == pytest.approx(-beta(h, f), abs=1e-12)
    assert abs(beta(f, f)) < 1e-14


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_gaussian_norm_is_one_half(s):
    # integral_0^inf E s^2 exp(-s^2 E^2) dE = 1/2 for every width
    f = gauss(0.4, s)
    assert real_ip(f, f) == pytest.approx(0.5, rel=1e-8)
    assert complex_ip(f, f).real == pytest.approx(0.5, rel=1e-8)


def test_real_ip_against_scipy_quad():
    a, s1, s2 = 0.9, 0.7, 1.1
    f, h = gauss(a, s1), gauss(0.0, s2)
    integrand = lambda E: E * s1 * s2 * np.exp(-0.5 * (s1**2 + s2**2) * E * E) * np.cos(E * a)
    expected, _ = quad(integrand, 0.0, np.inf, epsabs=1e-14)
    assert real_ip(f, h) == pytest.approx(expected, rel=1e-7)


def test_imaginary_part_is_beta():
    f, h = gauss(0.6, 0.8), gauss(-0.3, 1.0)
    z = complex_ip(f, h)
    assert z.imag == pytest.approx(beta(f, h), abs=1e-7)
    assert z.real == pytest.approx(real_ip(f, h), abs=1e-7)


def test_epsilon_kernel_agrees():
    f, h = gauss(0.4, 0.8), gauss(-0.2, 0.9)
    window = (-8.0, 8.0)
    lim = epsilon_kernel_limit(lambda u: np.exp(-0.5 * ((u - 0.4) / 0.8) ** 2),
                               lambda u: np.exp(-0.5 * ((u + 0.2) / 0.9) ** 2), window=window)
    z = complex_ip(f, h)
    assert abs(lim - z) <= 1e-3 * abs(z)


def test_richardson_removes_linear_and_quadratic_terms():
    vals = [3.0 + 2.0 * h - 5.0 * h * h for h in (0.1, 0.05, 0.025)]
    assert richardson(vals) == pytest.approx(3.0, abs=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(0.5, 1.5), st.floats(-2, 2), st.floats(0.5, 1.5), st.floats(-3, 3))
def test_cauchy_schwarz_and_positivity(a1, s1, a2, s2, c):
    f, h = gauss(a1, s1), gauss(a2, s2, c)
    ff, hh = complex_ip(f, f).real, complex_ip(h, h).real
    assert ff > 0.0 and hh >= 0.0
    assert abs(complex_ip(f, h)) ** 2 <= ff * hh * (1 + 1e-9) + 1e-15


def test_profile_grid_mismatch():
    other = HalfLineProfile.from_function(UGrid(-1.0, 1.0, 32), np.cos)
    with pytest.raises(GridMismatch):
        beta(gauss(), other)


@pytest.fixture(scope="module")
def two_fields():
    sphere = make_sphere_grid(4, 8)
    g = UGrid(-12.0, 12.0, 768)
    f1 = field_from_function(sphere, g, lambda u, n: np.exp(-0.5 * (u - 0.3 * n[..., 0]) ** 2))
    f2 = field_from_function(sphere, g, lambda u, n: (1 + n[..., 2]) * np.exp(-((u + 0.5) ** 2)))
    return f1, f2


def test_sigma_is_twice_imaginary_boundary_ip(two_fields):
    f1, f2 = two_fields
    z = boundary_ip(f1, f2)
    assert sigma_boundary(f1, f2) == pytest.approx(2.0 * z.imag, rel=1e-6)
    assert sigma_boundary(f1, f2) == pytest.approx(-sigma_boundary(f2, f1))


def test_boundary_ip_hermitian(two_fields):
    f1, f2 = two_fields
    assert boundary_ip(f1, f2) == pytest.approx(np.conj(boundary_ip(f2, f1)), rel=1e-12)
    assert boundary_norm2(f1) > 0


def test_norm_identity_for_gaussian_source():
    src = BulkSource.gaussian(0.2, 0.6, (0.3, -0.1, 0.2), 0.5)
    sphere = make_sphere_grid(16, 32)
    psi = upsilon(src, One(), sphere, auto_ugrid(src, 1024))
    ref = kg_momentum_norm(src, sphere)
    assert boundary_norm2(psi) == pytest.approx(ref, rel=1e-4)


def test_kg_norm_scales_quadratically():
    src = BulkSource.gaussian(0.0, 0.7, (0, 0, 0), 0.5)
    sphere = make_sphere_grid(8, 16)
    assert kg_momentum_norm(src.scaled(3.0), sphere) == pytest.approx(9.0 * kg_momentum_norm(src, sphere))
    assert kg_momentum_norm(BulkSource(), sphere) == 0.0
    with pytest.raises(NonGaussianTerm):
        kg_momentum_norm(BulkSource.bump())

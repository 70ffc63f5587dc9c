import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scriholo.discretization import UGrid, e_profile, make_sphere_grid
from scriholo.errors import GaugeRegion, NonGaussianTerm, SupportOverflow
from scriholo.geometry import ApexCut
from scriholo.holography import (Box, BulkSource, ExpTime, One, RationalTime, SpatialBump, auto_ugrid,
                                 conformal_factor_from_dict, kirchhoff_minkowski, rescaled_bulk, upsilon,
                                 upsilon_fourier, upsilon_points)


@pytest.fixture(scope="module")
def sphere():
    return make_sphere_grid(4, 8)


@pytest.fixture(scope="module")
def gauss():
    return BulkSource.gaussian(0.3, 0.5, (0.2, -0.1, 0.4), 0.6)


def test_unit_gaussian_closed_form_value(sphere):
    # integral of exp(-(u + n.x)^2/2 - |x|^2/2) d^3x = 2 pi^(3/2) exp(-u^2/4) at s = w = 1
    src = BulkSource.gaussian()
    g = UGrid(-3.0, 3.0, 61)
    psi = upsilon(src, One(), sphere, g)
    assert np.allclose(psi.samples, 2.0 * np.pi**1.5 * np.exp(-g.nodes**2 / 4.0), rtol=1e-14)


@pytest.mark.parametrize("chi", [One(), ExpTime(0.15)])
def test_closed_form_matches_quadrature(sphere, gauss, chi):
    g = UGrid(-4.0, 4.0, 33)
    closed = upsilon(gauss, chi, sphere, g, method="closed")
    quad = upsilon(gauss, chi, sphere, g, method="quadrature", n_quad=48)
    assert np.max(np.abs(closed.samples - quad.samples)) <= 1e-8 * closed.peak()


def test_projection_matches_closed_form(sphere, gauss):
    g = UGrid(-4.0, 4.0, 33)
    closed = upsilon(gauss, ExpTime(0.1), sphere, g, method="closed")
    proj = upsilon(gauss, ExpTime(0.1), sphere, g, method="projection")
    assert np.max(np.abs(closed.samples - proj.samples)) <= 1e-8 * closed.peak()


def test_bump_projection_matches_quadrature(sphere):
    src = BulkSource.bump(0.2, 0.7, (0.1, 0.0, -0.2), 0.5)
    g = UGrid(-2.0, 2.0, 21)
    proj = upsilon(src, One(), sphere, g, method="projection")
    quad = upsilon(src, One(), sphere, g, method="quadrature", n_quad=64)
    assert np.max(np.abs(proj.samples - quad.samples)) <= 1e-4 * proj.peak()


def test_bump_plane_table_accuracy():
    b = SpatialBump((0.0, 0.0, 0.0), 0.8)
    z = np.linspace(-0.8, 0.8, 1001)
    assert np.max(np.abs(b.projection(z) - b.projection(z, exact=True))) < 1e-13


def test_time_shift_shifts_u(sphere):
    g = UGrid(-8.0, 8.0, 401)
    a = upsilon(BulkSource.gaussian(0.0, 0.5, (0.3, 0.0, 0.0), 0.4), One(), sphere, g)
    b = upsilon(BulkSource.gaussian(1.0, 0.5, (0.3, 0.0, 0.0), 0.4), One(), sphere, g)
    assert np.allclose(b.samples[:, 100:], a.samples[:, 75:-25], atol=1e-12)


def test_space_shift_moves_profile_by_n_dot_a(sphere):
    g = UGrid(-6.0, 6.0, 121)
    a = np.array([0.3, -0.2, 0.5])
    base = upsilon(BulkSource.gaussian(0.0, 0.5, (0, 0, 0), 0.4), One(), sphere, g)
    moved = upsilon(BulkSource.gaussian(0.0, 0.5, a, 0.4), One(), sphere, g)
    peaks_base = g.nodes[np.argmax(base.samples, axis=1)]
    shift = sphere.nodes @ a
    expected = (2.0 * np.pi) ** 1.5 * 0.5 * 0.4**3 / np.hypot(0.5, 0.4) * np.exp(
        -0.5 * (g.nodes[None, :] + shift[:, None]) ** 2 / (0.25 + 0.16))
    assert np.allclose(moved.samples, expected, rtol=1e-12)
    assert np.all(peaks_base == 0.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(-3.0, 3.0))
def test_linearity(a, b):
    sphere = make_sphere_grid(4, 8)
    g = UGrid(-6.0, 6.0, 64)
    f = BulkSource.gaussian(0.1, 0.5, (0.2, 0.0, 0.0), 0.5)
    h = BulkSource.gaussian(-0.4, 0.7, (0.0, 0.3, 0.0), 0.4)
    lhs = upsilon(f.scaled(a) + h.scaled(b), One(), sphere, g)
    rhs = upsilon(f, One(), sphere, g) * a + upsilon(h, One(), sphere, g) * b
    assert np.allclose(lhs.samples, rhs.samples, atol=1e-12)


def test_fourier_route_matches_dft(gauss):
    sphere = make_sphere_grid(4, 8)
    g = auto_ugrid(gauss, 1024)
    psi = upsilon(gauss, One(), sphere, g)
    for node in (0, 13, 31):
        prof = e_profile(psi, node)
        ref = upsilon_fourier(gauss, sphere.nodes[node], prof.energies)
        mask = prof.energies < 10.0
        assert np.max(np.abs(prof.values[mask] - ref.values[mask])) <= 1e-6 * np.max(np.abs(ref.values))


def test_fourier_route_needs_gaussians():
    with pytest.raises(NonGaussianTerm):
        upsilon_fourier(BulkSource.bump(), (0, 0, 1), np.linspace(0, 1, 5))
    with pytest.raises(NonGaussianTerm):
        upsilon(BulkSource.bump(), One(), make_sphere_grid(4, 8), UGrid(-2, 2, 16), method="closed")


def test_causal_support_below_apex_cut(sphere):
    src = BulkSource.bump(1.0, 0.4, (0.2, -0.3, 0.1), 0.5)
    apex = ApexCut(1.0 - 0.4 - 0.5, (0.2, -0.3, 0.1))
    g = UGrid(-3.0, 4.0, 281)
    psi = upsilon(src, One(), sphere, g)
    below = g.nodes[None, :] <= apex.values(sphere)[:, None]
    assert np.max(np.abs(psi.samples[below])) <= 1e-8 * psi.peak()
    assert psi.peak() > 0.0


def test_zero_source_gives_zero(sphere):
    psi = upsilon(BulkSource(), ExpTime(0.2), sphere, UGrid(-1, 1, 16))
    assert psi.peak() == 0.0
    assert kirchhoff_minkowski(BulkSource(), 0.0, 50.0, (0, 0, 1)) == 0.0


def test_box_too_small_is_rejected(gauss):
    with pytest.raises(SupportOverflow):
        upsilon_points(gauss, One(), [0.0], (0, 0, 1), box=Box((-1, -1, -1), (1, 1, 1)))


def test_kirchhoff_swap_is_antisymmetric(gauss):
    u = np.linspace(-2.0, 2.0, 7)
    a = kirchhoff_minkowski(gauss, u, 60.0, (0.0, 0.6, 0.8))
    b = kirchhoff_minkowski(gauss, u, 60.0, (0.0, 0.6, 0.8), swap=True)
    assert np.allclose(a, -b, rtol=0, atol=1e-14 * np.max(np.abs(a)))


def test_kirchhoff_axial_matches_cartesian(gauss):
    u = np.linspace(-2.0, 2.0, 5)
    n = np.array([0.48, 0.6, 0.64])
    a = kirchhoff_minkowski(gauss, u, 80.0, n)
    c = kirchhoff_minkowski(gauss, u, 80.0, n, rule="cartesian", n_quad=48)
    assert np.max(np.abs(a - c)) <= 1e-8 * np.max(np.abs(a))


def test_kirchhoff_callable_integrand_matches_source(gauss):
    u = np.array([-0.5, 0.5])
    n = (0.0, 0.0, 1.0)
    box = Box.around(gauss)
    via_call = kirchhoff_minkowski(gauss.__call__, u, 60.0, n, box=box, n_quad=48)
    via_src = kirchhoff_minkowski(gauss, u, 60.0, n, rule="cartesian", n_quad=48)
    assert np.allclose(via_call, via_src, rtol=1e-12)
    with pytest.raises(ValueError):
        kirchhoff_minkowski(gauss.__call__, u, 60.0, n)


def test_rescaled_bulk_approaches_transform(gauss):
    n = np.array([0.0, 0.6, 0.8])
    u = np.linspace(-3.0, 3.0, 25)
    ref = upsilon_points(gauss, One(), u, n)
    errs = [np.max(np.abs(rescaled_bulk(gauss, One(), u, v, n) - ref)) for v in (50.0, 100.0, 200.0)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.01 * np.max(np.abs(ref))


def test_rescaled_bulk_gauge_region(gauss):
    with pytest.raises(GaugeRegion):
        rescaled_bulk(gauss, One(), 0.0, 5.0, (0, 0, 1))


@pytest.mark.parametrize("chi", [One(), ExpTime(0.3), RationalTime(0.5)])
def test_conformal_factor_derivatives(chi):
    t = np.linspace(-2.0, 2.0, 9)
    h = 1e-4
    dt = (chi.value(t + h) - chi.value(t - h)) / (2 * h)
    dtt = (chi.value(t + h) - 2 * chi.value(t) + chi.value(t - h)) / h**2
    assert np.allclose(chi.dt(t), dt, atol=1e-7)
    assert np.allclose(chi.dtt(t), dtt, atol=1e-5)
    assert np.allclose(chi.du(t), 0.5 * chi.dt(t))
    assert np.allclose(chi.duu(t), 0.25 * chi.dtt(t))
    assert conformal_factor_from_dict(chi.to_dict()) == chi


def test_rational_time_rejects_negative():
    with pytest.raises(ValueError):
        RationalTime(-1.0)


def test_source_dict_round_trip(gauss):
    both = gauss + BulkSource.bump(0.0, 1.0, (1, 0, 0), 0.3, amplitude=2.0)
    again = BulkSource.from_dict(both.to_dict())
    assert again == both
    assert not both.is_gaussian and gauss.is_gaussian


def test_source_fourier_matches_quadrature():
    src = BulkSource.gaussian(0.2, 0.5, (0.1, 0.0, 0.0), 0.4)
    t = np.linspace(-5, 5, 801)
    x1 = np.linspace(-4, 4, 161)
    k0, k = 1.3, np.array([0.7, 0.0, 0.0])
    # separable: time integral times x-integral, the y,z integrals are Gaussian
    ft = np.trapezoid(np.exp(-0.5 * ((t - 0.2) / 0.5) ** 2) * np.exp(1j * k0 * t), t)
    fx = np.trapezoid(np.exp(-0.5 * ((x1 - 0.1) / 0.4) ** 2) * np.exp(-1j * 0.7 * x1), x1)
    fyz = 2 * np.pi * 0.4**2
    expected = ft * fx * fyz / (2 * np.pi) ** 2
    assert src.fourier(k0, k) == pytest.approx(expected, rel=1e-10)

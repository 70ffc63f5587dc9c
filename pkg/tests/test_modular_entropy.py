import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scriholo.discretization import UGrid, field_from_function, make_sphere_grid, zeros_field
from scriholo.errors import CutOutsideWindow, NegativeDeformation, SupportViolation
from scriholo.geometry import ConstantCut, HarmonicCut, TabulatedCut
from scriholo.modular_entropy import (CutIntegrator, anec, anec_routes, deformation_scan, distorted_dilate,
                                      distorted_translate, entropy, entropy_derivative, modular_flow,
                                      modular_form, qnec_second_derivative, relative_entropy,
                                      superadditivity_check)
from scriholo.one_particle import boundary_ip

SPHERE = make_sphere_grid(8, 16)
GRID = UGrid(-12.0, 12.0, 1024)


def bump(z):
    z = np.asarray(z, dtype=float)
    out = np.zeros(np.broadcast_shapes(z.shape))
    z = np.broadcast_to(z, out.shape)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


@pytest.fixture(scope="module")
def unit_gauss():
    return field_from_function(SPHERE, GRID, lambda u, n: np.exp(-0.5 * u * u) + 0.0 * n[..., 0])


@pytest.fixture(scope="module")
def tilted_gauss():
    return field_from_function(SPHERE, GRID, lambda u, n: (1.0 + 0.4 * n[..., 2]) * np.exp(-0.5 * (u - 0.3 * n[..., 0]) ** 2))


@pytest.fixture(scope="module")
def supported():
    # bumps living in u > 0.5 + 0.2 n_z, above the cut 0.2 n_z
    return field_from_function(SPHERE, GRID, lambda u, n: (1.0 + 0.3 * n[..., 1]) * bump((u - 2.5 - 0.2 * n[..., 2]) / 1.5))


def test_entropy_of_unit_gaussian(unit_gauss):
    assert entropy(unit_gauss, ConstantCut(0.0)).total == pytest.approx(2.0 * np.pi**2, rel=1e-6)


def test_anec_of_unit_gaussian(unit_gauss):
    assert anec(unit_gauss, 1.0) == pytest.approx(np.pi**1.5, rel=1e-6)
    assert anec_routes(unit_gauss, 1.0).relative_gap <= 1e-6


def test_zero_field_gives_zero():
    z = zeros_field(SPHERE, GRID)
    assert entropy(z, ConstantCut(0.0)).total == 0.0
    assert anec(z, 1.0) == 0.0
    assert modular_form(z, ConstantCut(0.0)) == 0.0


def test_locality_field_below_cut():
    psi = field_from_function(SPHERE, GRID, lambda u, n: bump((u + 3.0 - n[..., 0]) / 1.5))
    assert entropy(psi, HarmonicCut(((0, 0, 0.0), (1, 1, 0.1)))).total <= 1e-10


def test_quadratic_scaling(tilted_gauss):
    cut = HarmonicCut(((0, 0, 0.2), (1, 0, 0.3)))
    s1 = entropy(tilted_gauss, cut).total
    assert entropy(tilted_gauss * 3.0, cut).total == pytest.approx(9.0 * s1, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.0, 2.0))
def test_monotone_in_the_cut(c, gap):
    psi = field_from_function(SPHERE, GRID, lambda u, n: np.exp(-0.5 * (u - 0.3 * n[..., 0]) ** 2))
    lo = entropy(psi, ConstantCut(c)).total
    hi = entropy(psi, ConstantCut(c + gap)).total
    assert 0.0 <= hi <= lo + 1e-12


def test_per_node_exactness_against_quad():
    # the sub-cell integration makes S a smooth function of a cut between grid nodes
    psi = field_from_function(SPHERE, GRID, lambda u, n: np.exp(-0.5 * u * u) + 0.0 * n[..., 0])
    c = 0.123456
    # pi * 4 pi * integral_c^inf (u - c) u^2 exp(-u^2) du
    from scipy.integrate import quad
    exact = 4.0 * np.pi**2 * quad(lambda u: (u - c) * u * u * np.exp(-u * u), c, np.inf, epsabs=1e-14)[0]
    assert entropy(psi, ConstantCut(c)).total == pytest.approx(exact, rel=1e-7)


def test_cut_outside_window(unit_gauss):
    with pytest.raises(CutOutsideWindow):
        entropy(unit_gauss, ConstantCut(-20.0))


def test_derivative_matches_finite_difference(tilted_gauss):
    cut = HarmonicCut(((0, 0, -0.2), (1, 1, 0.2)))
    a = HarmonicCut(((0, 0, 1.5), (1, 0, 0.3)))
    t, d = 0.3, 1e-3
    c0, av = cut.values(SPHERE), a.values(SPHERE)
    fd = (entropy(tilted_gauss, c0 + (t + d) * av).total - entropy(tilted_gauss, c0 + (t - d) * av).total) / (2 * d)
    assert entropy_derivative(tilted_gauss, cut, a, t) == pytest.approx(fd, rel=1e-5)


def test_second_derivative_matches_finite_difference(tilted_gauss):
    scan = deformation_scan(tilted_gauss, ConstantCut(-0.5), HarmonicCut(((0, 0, 2.0), (1, 2, 0.5))),
                            np.linspace(-0.5, 1.0, 7))
    assert scan.qnec_ok and scan.monotone_ok
    assert scan.fd_residual() <= 1e-3


def test_zero_deformation(tilted_gauss):
    assert entropy_derivative(tilted_gauss, ConstantCut(0.0), 0.0, 0.4) == 0.0
    assert qnec_second_derivative(tilted_gauss, ConstantCut(0.0), 0.0, 0.4) == 0.0


def test_second_derivative_vanishes_where_derivative_does(unit_gauss):
    # d_u psi = 0 at u = 0 for the centered Gaussian
    assert abs(qnec_second_derivative(unit_gauss, ConstantCut(0.0), 1.0, 0.0)) <= 1e-10


def test_negative_deformation_rejected(tilted_gauss):
    with pytest.raises(NegativeDeformation):
        entropy_derivative(tilted_gauss, ConstantCut(0.0), HarmonicCut(((1, 0, 1.0),)), 0.0)


def test_affine_segment(supported):
    cut, a = ConstantCut(-2.0), HarmonicCut(((0, 0, 1.0), (1, 1, 0.2)))
    ts = np.linspace(0.0, 0.8, 5)
    scan = deformation_scan(supported, cut, a, ts)
    slope = -2.0 * np.pi * anec(supported, a)
    assert np.allclose(scan.dS, slope, rtol=1e-9)
    assert np.allclose(scan.S, scan.S[0] + slope * ts, rtol=1e-6)
    assert np.max(np.abs(scan.d2S)) < 1e-12


def test_superadditivity_examples(tilted_gauss, rng):
    c1 = HarmonicCut(((1, 0, 0.3 * np.sqrt(4 * np.pi / 3)),))
    c2 = HarmonicCut(((1, 0, -0.3 * np.sqrt(4 * np.pi / 3)),))
    assert superadditivity_check(tilted_gauss, c1, c1) <= 1e-14
    assert superadditivity_check(tilted_gauss, c1, c2) <= 1e-12
    for _ in range(5):
        coeffs = lambda: tuple((l, m, rng.normal(scale=0.3)) for l in range(3) for m in range(-l, l + 1))
        assert superadditivity_check(tilted_gauss, HarmonicCut(coeffs()), HarmonicCut(coeffs())) <= 1e-10


def test_modular_form_equals_entropy(supported):
    cut = HarmonicCut(((0, 0, 0.0), (1, 0, 0.2 * np.sqrt(4 * np.pi / 3))))
    s = entropy(supported, cut).total
    assert modular_form(supported, cut) == pytest.approx(s, rel=1e-3)
    assert modular_form(supported, cut, flip_sign=True) < 0.0


def test_flow_identity_group_law_and_support(supported):
    cut = ConstantCut(0.3)
    assert np.array_equal(modular_flow(supported, cut, 0.0).samples, supported.samples)
    a = modular_flow(modular_flow(supported, cut, 0.03), cut, 0.05)
    b = modular_flow(supported, cut, 0.08)
    assert np.max(np.abs(a.samples - b.samples)) <= 1e-5 * supported.peak()
    assert np.max(np.abs(b.samples[:, GRID.nodes < 0.3])) <= 1e-12 * supported.peak()


def test_flow_preserves_form_and_inner_product(supported):
    cut = ConstantCut(0.3)
    other = field_from_function(SPHERE, GRID, lambda u, n: bump((u - 3.0) / 2.0) * (1.0 + n[..., 0]))
    f1, f2 = modular_flow(supported, cut, 0.04), modular_flow(other, cut, 0.04)
    assert modular_form(f1, cut) == pytest.approx(modular_form(supported, cut), rel=1e-3)
    z0, z1 = boundary_ip(supported, other), boundary_ip(f1, f2)
    assert abs(z1 - z0) <= 1e-4 * abs(z0)


def test_flow_rejects_unsupported(tilted_gauss):
    with pytest.raises(SupportViolation):
        modular_flow(tilted_gauss, ConstantCut(0.0), 0.1)
    with pytest.raises(SupportViolation):
        modular_form(tilted_gauss, ConstantCut(0.0))


def test_half_sided_inclusion_direction(supported):
    # support above C1 + A survives the flow of C1 for s >= 0
    c1 = ConstantCut(-1.0)
    c2 = HarmonicCut(((0, 0, 0.2 * np.sqrt(4 * np.pi)), (1, 0, 0.1)))
    for s in (0.0, 0.02, 0.1):
        flowed = modular_flow(supported, c1, s)
        below = GRID.nodes[None, :] < c2.values(SPHERE)[:, None]
        assert np.max(np.abs(flowed.samples[below])) <= 1e-12


def test_distorted_translation_covariance(tilted_gauss):
    a = HarmonicCut(((0, 0, 0.5), (1, -1, 0.4)))
    cut = ConstantCut(-0.2)
    moved = distorted_translate(tilted_gauss, a)
    shifted = TabulatedCut(SPHERE, cut.values(SPHERE) + a.values(SPHERE))
    assert entropy(moved, shifted).total == pytest.approx(entropy(tilted_gauss, cut).total, rel=1e-6)


def test_distorted_maps_keep_inner_products(tilted_gauss, supported):
    a = HarmonicCut(((0, 0, 0.5), (1, -1, 0.4)))
    z0 = boundary_ip(tilted_gauss, supported)
    z1 = boundary_ip(distorted_translate(tilted_gauss, a), distorted_translate(supported, a))
    assert abs(z1 - z0) <= 1e-4 * abs(z0)
    z2 = boundary_ip(distorted_dilate(tilted_gauss, a), distorted_dilate(supported, a))
    assert abs(z2 - z0) <= 1e-4 * abs(z0)
    assert distorted_translate(tilted_gauss, 0.0).samples is not tilted_gauss.samples
    assert np.array_equal(distorted_dilate(tilted_gauss, 0.0).samples, tilted_gauss.samples)


def test_relative_entropy_is_difference_vector(tilted_gauss, unit_gauss):
    cut = ConstantCut(0.1)
    assert relative_entropy(tilted_gauss, unit_gauss, cut).total == pytest.approx(
        entropy(tilted_gauss - unit_gauss, cut).total)
    assert relative_entropy(tilted_gauss, tilted_gauss, cut).total == 0.0


def test_report_serialization(tilted_gauss):
    rep = entropy(tilted_gauss, ConstantCut(0.0))
    data = json.loads(json.dumps(rep.to_json()))
    assert data["total"] == rep.total and len(data["per_angle"]) == SPHERE.size
    assert rep.to_csv().splitlines()[0] == "node,density"
    scan = deformation_scan(tilted_gauss, ConstantCut(0.0), 1.0, [0.0, 0.5])
    assert scan.to_csv().splitlines()[0] == "t,S,dS,d2S,d2S_fd"
    assert json.loads(json.dumps(scan.to_json()))["qnec"] == "pass"


def test_integrator_total_power(unit_gauss):
    integ = CutIntegrator(unit_gauss)
    # integral of u^2 exp(-u^2) over the line is sqrt(pi)/2; error is set by the h^4 derivative stencil
    assert np.allclose(integ.total_power(), np.sqrt(np.pi) / 2.0, rtol=2e-7)

"""Acceptance battery: each criterion returns a structured verdict with residuals."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discretization import UGrid, field_from_function, make_sphere_grid
from .geometry import (ApexCut, CartesianEvent, ConstantCut, HarmonicCut, NullCoords, causally_precedes,
                       cut_of_apex, from_compact, from_null, scri_limit_curve, to_compact, to_null)
from .holography import (BulkSource, ExpTime, GaussianProfile, IsotropicGaussian, One, SourceTerm,
                         auto_ugrid, rescaled_bulk, upsilon, upsilon_values)
from .modular_entropy import (CutIntegrator, anec, deformation_scan, entropy, modular_flow,
                              modular_form, superadditivity_check)
from .one_particle import (HalfLineProfile, beta, boundary_ip, boundary_norm2, complex_ip,
                           epsilon_kernel_limit, kg_momentum_norm, real_ip)
from .stress_energy import entropy_from_stress


@dataclass
class CriterionResult:
    name: str
    title: str
    passed: bool
    residuals: dict
    tolerances: dict
    seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        worst = ", ".join(f"{k}={_fmt(v)}" for k, v in self.residuals.items())
        return f"{self.name} {verdict} {self.title}: {worst}"

    def to_json(self) -> dict:
        return {"name": self.name, "title": self.title, "passed": self.passed,
                "residuals": {k: _jsonable(v) for k, v in self.residuals.items()},
                "tolerances": {k: _jsonable(v) for k, v in self.tolerances.items()},
                "notes": {k: _jsonable(v) for k, v in self.notes.items()}}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.3e}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def random_gaussian_source(rng: np.random.Generator, n_terms: int = 2) -> BulkSource:
    terms = []
    for _ in range(n_terms):
        terms.append(SourceTerm(float(rng.uniform(0.5, 1.5)),
                                GaussianProfile(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.4, 0.9))),
                                IsotropicGaussian(tuple(rng.uniform(-0.5, 0.5, 3)), float(rng.uniform(0.4, 0.9)))))
    return BulkSource(tuple(terms))


def random_harmonic_cut(rng: np.random.Generator, degree: int = 2, scale: float = 0.3,
                        offset: float = 0.0) -> HarmonicCut:
    coeffs = {(0, 0): offset * np.sqrt(4.0 * np.pi)}
    for ell in range(1, degree + 1):
        for m in range(-ell, ell + 1):
            coeffs[(ell, m)] = float(rng.normal(0.0, scale / (ell + 1)))
    return HarmonicCut.from_mapping(coeffs)


def _grid(n_theta=32, n_phi=64):
    return make_sphere_grid(n_theta, n_phi)


# criteria

def a1_norm_identity(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 101)
    sg = _grid()
    rel = []
    for k in range(5):
        src = random_gaussian_source(rng, n_terms=1 + k % 2)
        ug = auto_ugrid(src, 1024)
        lhs = boundary_norm2(upsilon(src, One(), sg, ug))
        rhs = kg_momentum_norm(src, sg)
        rel.append(abs(lhs - rhs) / abs(rhs))
    worst = max(rel)
    return CriterionResult("A1", "norm identity", worst <= 1e-4, {"max_rel": worst},
                           {"max_rel": 1e-4}, notes={"per_source": rel})


def a2_causal_support(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 202)
    sg = _grid()
    worst = 0.0
    for _ in range(5):
        apex = CartesianEvent(float(rng.uniform(-1, 1)), tuple(rng.uniform(-0.5, 0.5, 3)))
        x0 = np.array(apex.x) + rng.uniform(-0.6, 0.6, 3)
        s, w = float(rng.uniform(0.4, 0.8)), float(rng.uniform(0.4, 0.8))
        t0 = apex.t + np.linalg.norm(x0 - np.array(apex.x)) + s + w + float(rng.uniform(0.05, 0.5))
        src = BulkSource.bump(t0, s, tuple(x0), w)
        ug = UGrid(apex.t - 3.0, t0 + s + w + np.linalg.norm(x0) + 0.5, 1024)
        psi = upsilon(src, One(), sg, ug)
        cx = cut_of_apex(apex).values(sg)
        below = psi.u[None, :] <= cx[:, None]
        ratio = float(np.max(np.abs(psi.samples) * below) / psi.peak())
        worst = max(worst, ratio)
    return CriterionResult("A2", "causal support", worst <= 1e-8, {"max_below_over_peak": worst},
                           {"max_below_over_peak": 1e-8})


def a3_qnec(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 303)
    sg = _grid()
    t_values = np.linspace(-1.5, 3.0, 21)
    min_d2 = np.inf
    fd_rel = 0.0
    max_d1 = -np.inf
    max_rise = -np.inf
    for _ in range(10):
        src = random_gaussian_source(rng, 2)
        ug = auto_ugrid(src, 1024)
        psi = upsilon(src, One(), sg, ug)
        cut = random_harmonic_cut(rng, 2, 0.3)
        bump = random_harmonic_cut(rng, 2, 0.3)
        bv = bump.values(sg)
        a_vals = 1.0 + 0.5 * bv / max(np.max(np.abs(bv)), 1e-12)
        scan = deformation_scan(psi, cut, a_vals, t_values)
        min_d2 = min(min_d2, float(np.min(scan.d2S)))
        fd_rel = max(fd_rel, scan.fd_residual(1e-8))
        max_d1 = max(max_d1, float(np.max(scan.dS)))
        max_rise = max(max_rise, float(np.max(np.diff(scan.S))))
    ok = min_d2 >= 0.0 and fd_rel <= 1e-3 and max_d1 <= 0.0 and max_rise <= 0.0
    return CriterionResult("A3", "QNEC", ok,
                           {"min_d2S": min_d2, "max_fd_rel": fd_rel, "max_dS": max_d1, "max_S_rise": max_rise},
                           {"min_d2S": ">= 0", "max_fd_rel": 1e-3, "max_dS": "<= 0", "max_S_rise": "<= 0"})


def a4_superadditivity(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 404)
    sg = _grid()
    src = random_gaussian_source(rng, 2)
    ug = auto_ugrid(src, 1024)
    psi = upsilon(src, One(), sg, ug)
    integ = CutIntegrator(psi)
    worst = 0.0
    for _ in range(10):
        c1 = random_harmonic_cut(rng, 3, 0.6)
        c2 = random_harmonic_cut(rng, 3, 0.6)
        worst = max(worst, superadditivity_check(psi, c1, c2, integ))
    return CriterionResult("A4", "strong superadditivity", worst <= 1e-10, {"max_rel": worst},
                           {"max_rel": 1e-10})


def _supported_pair(sg):
    """Two bump transforms supported above the apex cut of the origin."""
    src1 = BulkSource.bump(3.0, 1.0, (0.3, -0.2, 0.1), 1.0)
    src2 = BulkSource.bump(3.4, 0.8, (-0.2, 0.25, 0.3), 0.9)
    ug = UGrid(-1.5, 8.5, 2048)
    return src1, src2, ug, upsilon(src1, One(), sg, ug), upsilon(src2, One(), sg, ug)


def a5_modular_consistency(seed: int = 0) -> CriterionResult:
    sg = _grid(16, 32)
    src1, src2, ug, psi, phi = _supported_pair(sg)
    cut = ConstantCut(0.0)
    form = modular_form(psi, cut)
    ent = entropy(psi, cut).total
    form_rel = abs(form - ent) / ent

    s1, s2 = 0.04, 0.06
    peak = psi.peak()
    u = np.broadcast_to(ug.nodes, psi.samples.shape)

    def exact(s):
        return upsilon_values(src1, One(), np.exp(-2.0 * np.pi * s) * u, sg.nodes)

    flows = {s: modular_flow(psi, cut, s) for s in (s1, s2, s1 + s2)}
    interp = max(float(np.max(np.abs(flows[s].samples - exact(s)))) / peak for s in flows)
    composed = modular_flow(flows[s2], cut, s1)
    group = float(np.max(np.abs(composed.samples - flows[s1 + s2].samples))) / peak
    below = float(np.max(np.abs(flows[s1 + s2].samples) * (u < 0.0))) / peak

    ip0 = boundary_ip(psi, phi)
    ip1 = boundary_ip(modular_flow(psi, cut, s1), modular_flow(phi, cut, s1))
    ip_rel = abs(ip1 - ip0) / np.sqrt(boundary_norm2(psi) * boundary_norm2(phi))

    start = ConstantCut(-1.0)
    ts = np.linspace(0.0, 1.0, 11)
    scan = deformation_scan(psi, start, 1.0, ts)
    an = anec(psi, 1.0)
    affine = float(np.max(np.abs(scan.S[0] - scan.S[1:] - 2.0 * np.pi * ts[1:] * an)
                          / np.abs(scan.S[0] - scan.S[1:])))
    ok = (form_rel <= 1e-3 and group <= 2.0 * interp and below <= 2.0 * interp
          and ip_rel <= 1e-4 and affine <= 1e-6)
    return CriterionResult(
        "A5", "modular consistency", ok,
        {"form_vs_entropy": form_rel, "group_law": group, "support_leak": below,
         "interp_tol": interp, "ip_invariance": ip_rel, "affine_identity": affine},
        {"form_vs_entropy": 1e-3, "group_law": "<= 2*interp_tol", "support_leak": "<= 2*interp_tol",
         "ip_invariance": 1e-4, "affine_identity": 1e-6})


def kirchhoff_errors(v_values=(50.0, 100.0, 200.0)):
    src = BulkSource.gaussian(0.0, 0.5, (0.3, -0.2, 0.4), 0.5)
    directions = [np.array([0.0, 0.6, 0.8]), np.array([1.0, 0.0, 0.0]), np.array([-0.48, 0.6, -0.64])]
    us = np.linspace(-3.0, 3.0, 61)
    errs = []
    for v in v_values:
        worst, peak = 0.0, 0.0
        for n in directions:
            ref = upsilon_values(src, One(), us[None, :], n[None, :])[0]
            val = rescaled_bulk(src, One(), us, v, n)
            worst = max(worst, float(np.max(np.abs(val - ref))))
            peak = max(peak, float(np.max(np.abs(ref))))
        errs.append(worst / peak)
    return np.array(v_values), np.array(errs)


def a6_kirchhoff_limit(seed: int = 0) -> CriterionResult:
    vs, errs = kirchhoff_errors()
    slope = -float(np.polyfit(np.log(vs), np.log(errs), 1)[0])
    decreasing = bool(np.all(np.diff(errs) < 0))
    ok = decreasing and 0.7 <= slope <= 1.3 and errs[-1] <= 1e-2
    return CriterionResult("A6", "Kirchhoff limit", ok,
                           {"err_v50": errs[0], "err_v100": errs[1], "err_v200": errs[2],
                            "slope": slope, "decreasing": decreasing},
                           {"slope": [0.7, 1.3], "err_v200": 1e-2})


def a7_stress_entropy(seed: int = 0) -> CriterionResult:
    sg = _grid(4, 8)
    src = BulkSource.gaussian(0.0, 0.5, (0.3, -0.2, 0.4), 0.5)
    cut = ConstantCut(0.0)
    residuals = {}
    ok = True
    for label, chi in (("one", One()), ("exp", ExpTime(0.1))):
        ug = auto_ugrid(src, 192, margin=7.0, chi=chi)
        ref = entropy(upsilon(src, chi, sg, ug), cut).total
        res = entropy_from_stress(src, chi, cut, 200.0, sg, ug)
        rel = abs(res.value - ref) / ref
        residuals[f"entropy_rel_{label}"] = rel
        residuals[f"identity_{label}"] = res.identity_residual
        ok = ok and rel <= 1e-2 and res.identity_residual <= 1e-4
    return CriterionResult("A7", "stress-tensor entropy", ok, residuals,
                           {"entropy_rel": 1e-2, "identity": 1e-4})


def random_mixture(rng: np.random.Generator, k: int = 3):
    centers = rng.uniform(-2.0, 2.0, k)
    widths = rng.uniform(0.6, 1.4, k)
    amps = rng.uniform(-1.0, 1.0, k)

    def fn(u):
        u = np.asarray(u, dtype=float)
        return sum(a * np.exp(-0.5 * ((u - c) / w) ** 2) for a, c, w in zip(amps, centers, widths))
    return fn


def a8_one_particle(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 808)
    ug = UGrid(-14.0, 14.0, 1024)
    decomp, cs_viol, min_norm = 0.0, 0.0, np.inf
    pairs = []
    for _ in range(100):
        f_fn, h_fn = random_mixture(rng), random_mixture(rng)
        f = HalfLineProfile.from_function(ug, f_fn)
        h = HalfLineProfile.from_function(ug, h_fn)
        ip = complex_ip(f, h)
        nf, nh = complex_ip(f, f).real, complex_ip(h, h).real
        scale = np.sqrt(nf * nh)
        decomp = max(decomp, abs(ip - (real_ip(f, h) + 1j * beta(f, h))) / scale)
        cs_viol = max(cs_viol, abs(ip) ** 2 - nf * nh)
        min_norm = min(min_norm, nf, nh)
        pairs.append((f_fn, h_fn, ip, scale))
    eps_err = 0.0
    for f_fn, h_fn, ip, scale in pairs[:3]:
        lim = epsilon_kernel_limit(f_fn, h_fn, window=(-10.0, 10.0))
        eps_err = max(eps_err, abs(lim - ip) / scale)
    ok = decomp <= 1e-6 and eps_err <= 1e-3 and cs_viol <= 0.0 and min_norm > 0.0
    return CriterionResult("A8", "one-particle structure", ok,
                           {"decomposition": decomp, "eps_kernel": eps_err,
                            "cauchy_schwarz_excess": cs_viol, "min_norm": min_norm},
                           {"decomposition": 1e-6, "eps_kernel": 1e-3,
                            "cauchy_schwarz_excess": "<= 0", "min_norm": "> 0"})


def _random_events(rng, count, r_lo=1e-6, r_hi=1e6):
    r = np.exp(rng.uniform(np.log(r_lo), np.log(r_hi), count))
    dirs = rng.normal(size=(count, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    t = rng.uniform(-1.0, 1.0, count) * r * rng.uniform(0.0, 2.0, count)
    return t, r[:, None] * dirs


def limit_decay_exponent(event: CartesianEvent, n, lams=(1e2, 1e3, 1e4)) -> float:
    n = np.asarray(n, dtype=float)
    target = event.t - float(np.array(event.x) @ n)
    errs = [abs(scri_limit_curve(event, n, lam) - target) for lam in lams]
    return -float(np.polyfit(np.log(lams), np.log(errs), 1)[0])


def a9_geometry(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 909)
    ts, xs = _random_events(rng, 10_000)
    worst_null, worst_compact = 0.0, 0.0
    for t, x in zip(ts, xs):
        e = CartesianEvent(t, x)
        back = from_null(to_null(e))
        scale = np.hypot(abs(t), np.linalg.norm(x))
        diff = np.hypot(back.t - t, np.linalg.norm(np.array(back.x) - x))
        worst_null = max(worst_null, diff / scale)
    # tan(arctan u) loses about |u| ulps, so the compact chart is checked where
    # a double-precision angle can hold u to 1e-12 relative
    ts, xs = _random_events(rng, 10_000, r_hi=1e3)
    for t, x in zip(ts, xs):
        nc = to_null(CartesianEvent(t, x))
        rt = from_compact(to_compact(nc))
        worst_compact = max(worst_compact, abs(rt.u - nc.u) / (1.0 + abs(nc.u)),
                            abs(rt.v - nc.v) / (1.0 + abs(nc.v)))
    exps = []
    for _ in range(20):
        ev = CartesianEvent(float(rng.uniform(-2, 2)), tuple(rng.uniform(-2, 2, 3)))
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        if abs(ev.t ** 2 - float(np.sum(np.square(ev.x)))) < 1e-3:
            continue
        exps.append(limit_decay_exponent(ev, n))
    sg = _grid()
    order_viol, inj_min = 0.0, np.inf
    for _ in range(1000):
        x = CartesianEvent(float(rng.uniform(-3, 3)), tuple(rng.uniform(-3, 3, 3)))
        tau = float(rng.uniform(0.0, 2.0))
        d = rng.normal(size=3)
        d *= tau * rng.uniform(0.0, 1.0) / np.linalg.norm(d)
        y = CartesianEvent(x.t + tau, tuple(np.array(x.x) + d))
        if causally_precedes(x, y):
            gap = cut_of_apex(y).values(sg) - cut_of_apex(x).values(sg)
            order_viol = max(order_viol, float(-np.min(gap)) - 1e-12 * (1 + abs(x.t) + abs(y.t)))
        z = CartesianEvent(float(rng.uniform(-3, 3)), tuple(rng.uniform(-3, 3, 3)))
        inj_min = min(inj_min, float(np.max(np.abs(cut_of_apex(z).values(sg) - cut_of_apex(x).values(sg)))))
    exps = np.array(exps)
    ok = (worst_null <= 1e-12 and worst_compact <= 1e-12 and np.all((exps >= 0.9) & (exps <= 1.1))
          and order_viol <= 0.0 and inj_min > 0.0)
    return CriterionResult("A9", "geometry", bool(ok),
                           {"null_roundtrip": worst_null, "compact_roundtrip": worst_compact,
                            "decay_exp_min": float(exps.min()), "decay_exp_max": float(exps.max()),
                            "order_violation": order_viol, "injectivity_min_gap": inj_min},
                           {"roundtrip": 1e-12, "decay_exp": [0.9, 1.1], "order_violation": "<= 0",
                            "injectivity_min_gap": "> 0"})


def a10_spot_values(seed: int = 0) -> CriterionResult:
    sg = _grid()
    ug = UGrid(-12.0, 12.0, 1024)
    psi = field_from_function(sg, ug, lambda u, n: np.exp(-0.5 * u * u) + 0.0 * n[..., 0])
    s = entropy(psi, ConstantCut(0.0)).total
    a = anec(psi, 1.0)
    rel_s = abs(s - 2.0 * np.pi**2) / (2.0 * np.pi**2)
    rel_a = abs(a - np.pi**1.5) / np.pi**1.5
    return CriterionResult("A10", "closed-form spot values", rel_s <= 1e-6 and rel_a <= 1e-6,
                           {"entropy_rel": rel_s, "anec_rel": rel_a},
                           {"entropy_rel": 1e-6, "anec_rel": 1e-6},
                           notes={"entropy": s, "anec": a})


CRITERIA: dict[str, Callable[..., CriterionResult]] = {
    "A1": a1_norm_identity,
    "A2": a2_causal_support,
    "A3": a3_qnec,
    "A4": a4_superadditivity,
    "A5": a5_modular_consistency,
    "A6": a6_kirchhoff_limit,
    "A7": a7_stress_entropy,
    "A8": a8_one_particle,
    "A9": a9_geometry,
    "A10": a10_spot_values,
}


def run_criterion(name: str, seed: int = 0) -> CriterionResult:
    if name not in CRITERIA:
        raise KeyError(f"unknown criterion {name!r}; choose from {sorted(CRITERIA)}")
    start = time.perf_counter()
    result = CRITERIA[name](seed=seed)
    result.seconds = time.perf_counter() - start
    return result


def run_all(seed: int = 0, names=None) -> list[CriterionResult]:
    return [run_criterion(n, seed) for n in (names or CRITERIA)]

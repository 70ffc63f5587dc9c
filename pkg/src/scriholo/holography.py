"""Bulk sources, conformal factors and the bulk-to-boundary transform.

The boundary value of a source f with conformal factor chi is

    Y(u, n) = integral d^3x (chi^3 f)(u + n.x, x),

evaluated either in closed form (Gaussian sources with chi = 1 or
chi = exp(rate*t)), through the one-dimensional plane projection of the
spatial profile (any time-only chi), or by brute-force 3D Gauss-Legendre
quadrature.  The finite-v Kirchhoff integral of chi^3 f, rescaled by the
conformal factor, converges to Y as v grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import exp1

from .discretization import BoundaryField, EProfile, SphereGrid, UGrid
from .errors import GaugeRegion, NonGaussianTerm, SupportOverflow

GAUSS_TRUNC = 9.0
V_GAUGE = 10.0


# temporal and spatial profiles

@dataclass(frozen=True)
class GaussianProfile:
    """exp(-(t - center)^2 / (2 width^2))."""

    center: float = 0.0
    width: float = 1.0
    kind = "gaussian"

    def __call__(self, t):
        z = (np.asarray(t, dtype=float) - self.center) / self.width
        return np.exp(-0.5 * z * z)

    @property
    def radius(self) -> float:
        return GAUSS_TRUNC * self.width

    def fourier(self, k):
        """integral g(t) exp(i k t) dt."""
        k = np.asarray(k, dtype=float)
        s = self.width
        return s * np.sqrt(2.0 * np.pi) * np.exp(1j * k * self.center - 0.5 * s * s * k * k)

    def to_dict(self):
        return {"kind": self.kind, "center": self.center, "width": self.width}


def _bump(z):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


@dataclass(frozen=True)
class BumpProfile:
    """exp(-1 / (1 - ((t - center)/width)^2)) inside |t - center| < width, else 0."""

    center: float = 0.0
    width: float = 1.0
    kind = "bump"

    def __call__(self, t):
        return _bump((np.asarray(t, dtype=float) - self.center) / self.width)

    @property
    def radius(self) -> float:
        return self.width

    def fourier(self, k):
        raise NonGaussianTerm("bump profiles have no closed-form Fourier transform")

    def to_dict(self):
        return {"kind": self.kind, "center": self.center, "width": self.width}


def _vec3(x) -> tuple[float, float, float]:
    return tuple(float(c) for c in np.asarray(x, dtype=float).reshape(3))


@dataclass(frozen=True)
class IsotropicGaussian:
    """exp(-|x - center|^2 / (2 width^2))."""

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    width: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center))

    def __call__(self, x):
        d = np.asarray(x, dtype=float) - np.array(self.center)
        return np.exp(-0.5 * np.sum(d * d, axis=-1) / self.width**2)

    @property
    def radius(self) -> float:
        return GAUSS_TRUNC * self.width

    def projection(self, z):
        """Integral over the plane at signed distance z from the center."""
        z = np.asarray(z, dtype=float)
        w = self.width
        return 2.0 * np.pi * w * w * np.exp(-0.5 * z * z / (w * w))

    def fourier(self, k):
        """integral S(x) exp(-i k.x) d^3x."""
        k = np.asarray(k, dtype=float)
        w = self.width
        k2 = np.sum(k * k, axis=-1)
        phase = k @ np.array(self.center)
        return (2.0 * np.pi) ** 1.5 * w**3 * np.exp(-1j * phase - 0.5 * w * w * k2)

    def to_dict(self):
        return {"kind": self.kind, "center": list(self.center), "width": self.width}


def _bump_plane_exact(a):
    return a * np.exp(-1.0 / a) - exp1(1.0 / a)


_TABLE_CELLS = 20000


@lru_cache(maxsize=1)
def _bump_plane_coefficients() -> np.ndarray:
    # exp1 is slow; the inner integral is smooth on [0, 1] and flat at 0
    a = np.linspace(0.0, 1.0, _TABLE_CELLS + 1)
    g = np.zeros_like(a)
    g[1:] = _bump_plane_exact(a[1:])
    return CubicSpline(a, g).c


def _bump_plane_table(a):
    c = _bump_plane_coefficients()
    idx = np.minimum((a * _TABLE_CELLS).astype(np.intp), _TABLE_CELLS - 1)
    dx = a - idx / _TABLE_CELLS
    return ((c[0, idx] * dx + c[1, idx]) * dx + c[2, idx]) * dx + c[3, idx]


@dataclass(frozen=True)
class SpatialBump:
    """exp(-1 / (1 - |x - center|^2 / width^2)) inside the ball, else 0."""

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    width: float = 1.0
    kind = "bump"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center))

    def __call__(self, x):
        d = np.asarray(x, dtype=float) - np.array(self.center)
        return _bump(np.sqrt(np.sum(d * d, axis=-1)) / self.width)

    @property
    def radius(self) -> float:
        return self.width

    def projection(self, z, exact: bool = False):
        """pi w^2 * integral_0^a exp(-1/p) dp with a = 1 - z^2/w^2.

        The default path interpolates a cached spline table of the inner
        integral; ``exact`` evaluates it through the exponential integral.
        """
        z = np.asarray(z, dtype=float)
        a = 1.0 - (z / self.width) ** 2
        out = np.zeros_like(a)
        m = a > 0.0
        out[m] = np.pi * self.width**2 * (_bump_plane_exact(a[m]) if exact else _bump_plane_table(a[m]))
        return out

    def fourier(self, k):
        raise NonGaussianTerm("bump profiles have no closed-form Fourier transform")

    def to_dict(self):
        return {"kind": self.kind, "center": list(self.center), "width": self.width}


_TEMPORAL = {"gaussian": GaussianProfile, "bump": BumpProfile}
_SPATIAL = {"gaussian": IsotropicGaussian, "bump": SpatialBump}


@dataclass(frozen=True)
class SourceTerm:
    amplitude: float
    temporal: GaussianProfile | BumpProfile
    spatial: IsotropicGaussian | SpatialBump

    @property
    def is_gaussian(self) -> bool:
        return self.temporal.kind == "gaussian" and self.spatial.kind == "gaussian"

    def __call__(self, t, x):
        return self.amplitude * self.temporal(t) * self.spatial(x)

    def to_dict(self):
        return {"amplitude": self.amplitude, "temporal": self.temporal.to_dict(),
                "spatial": self.spatial.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SourceTerm":
        tp, sp = d["temporal"], d["spatial"]
        return cls(float(d.get("amplitude", 1.0)),
                   _TEMPORAL[tp["kind"]](float(tp["center"]), float(tp["width"])),
                   _SPATIAL[sp["kind"]](_vec3(sp["center"]), float(sp["width"])))


@dataclass(frozen=True)
class BulkSource:
    """Finite sum of separable terms amplitude * T(t) * S(x)."""

    terms: tuple[SourceTerm, ...] = ()

    @classmethod
    def gaussian(cls, t0: float = 0.0, s: float = 1.0, x0=(0.0, 0.0, 0.0), w: float = 1.0,
                 amplitude: float = 1.0) -> "BulkSource":
        return cls((SourceTerm(amplitude, GaussianProfile(t0, s), IsotropicGaussian(x0, w)),))

    @classmethod
    def bump(cls, t0: float = 0.0, s: float = 1.0, x0=(0.0, 0.0, 0.0), w: float = 1.0,
             amplitude: float = 1.0) -> "BulkSource":
        return cls((SourceTerm(amplitude, BumpProfile(t0, s), SpatialBump(x0, w)),))

    @property
    def is_zero(self) -> bool:
        return all(term.amplitude == 0.0 for term in self.terms)

    @property
    def is_gaussian(self) -> bool:
        return all(term.is_gaussian for term in self.terms)

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.broadcast_shapes(t.shape, np.shape(x)[:-1]))
        for term in self.terms:
            out = out + term(t, x)
        return out

    def __add__(self, other: "BulkSource") -> "BulkSource":
        return BulkSource(self.terms + other.terms)

    def scaled(self, factor: float) -> "BulkSource":
        return BulkSource(tuple(SourceTerm(factor * tm.amplitude, tm.temporal, tm.spatial)
                                for tm in self.terms))

    def fourier(self, k0, k):
        """(2 pi)^-2 integral f(t, x) exp(i (k0 t - k.x)) dt d^3x for Gaussian terms."""
        if not self.is_gaussian:
            raise NonGaussianTerm("analytic Fourier transform needs all-Gaussian terms")
        k0 = np.asarray(k0, dtype=float)
        k = np.asarray(k, dtype=float)
        out = np.zeros(np.broadcast_shapes(k0.shape, k.shape[:-1]), dtype=complex)
        for term in self.terms:
            out = out + term.amplitude * term.temporal.fourier(k0) * term.spatial.fourier(k)
        return out / (2.0 * np.pi) ** 2

    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned box containing the effective spatial support."""
        if not self.terms:
            return np.zeros(3), np.zeros(3)
        lo = np.min([np.array(tm.spatial.center) - tm.spatial.radius for tm in self.terms], axis=0)
        hi = np.max([np.array(tm.spatial.center) + tm.spatial.radius for tm in self.terms], axis=0)
        return lo, hi

    def time_support(self) -> tuple[float, float]:
        if not self.terms:
            return 0.0, 0.0
        lo = min(tm.temporal.center - tm.temporal.radius for tm in self.terms)
        hi = max(tm.temporal.center + tm.temporal.radius for tm in self.terms)
        return lo, hi

    def u_range(self) -> tuple[float, float]:
        """Retarded times where the boundary transform can be nonzero."""
        if not self.terms:
            return 0.0, 0.0
        lo = min(tm.temporal.center - tm.temporal.radius - np.linalg.norm(tm.spatial.center)
                 - tm.spatial.radius for tm in self.terms)
        hi = max(tm.temporal.center + tm.temporal.radius + np.linalg.norm(tm.spatial.center)
                 + tm.spatial.radius for tm in self.terms)
        return float(lo), float(hi)

    def to_dict(self) -> dict:
        return {"terms": [tm.to_dict() for tm in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "BulkSource":
        return cls(tuple(SourceTerm.from_dict(t) for t in d.get("terms", [])))


# conformal factors

class ConformalFactor:
    """Positive smooth factor chi(t, x); the built-in families depend on t only."""

    time_only = True

    def value(self, t, x=None):
        raise NotImplementedError

    def dt(self, t, x=None):
        raise NotImplementedError

    def dtt(self, t, x=None):
        raise NotImplementedError

    def dr(self, t, x=None):
        return np.zeros_like(np.asarray(t, dtype=float))

    def du(self, t, x=None):
        """Null derivative (d_t - d_r)/2."""
        return 0.5 * (self.dt(t, x) - self.dr(t, x))

    def duu(self, t, x=None):
        return 0.25 * self.dtt(t, x)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class One(ConformalFactor):
    def value(self, t, x=None):
        return np.ones_like(np.asarray(t, dtype=float))

    def dt(self, t, x=None):
        return np.zeros_like(np.asarray(t, dtype=float))

    def dtt(self, t, x=None):
        return np.zeros_like(np.asarray(t, dtype=float))

    def to_dict(self):
        return {"kind": "one"}


@dataclass(frozen=True)
class ExpTime(ConformalFactor):
    """chi = exp(rate * t)."""

    rate: float = 0.0

    def value(self, t, x=None):
        return np.exp(self.rate * np.asarray(t, dtype=float))

    def dt(self, t, x=None):
        return self.rate * self.value(t)

    def dtt(self, t, x=None):
        return self.rate**2 * self.value(t)

    def to_dict(self):
        return {"kind": "exp_time", "rate": self.rate}


@dataclass(frozen=True)
class RationalTime(ConformalFactor):
    """chi = sqrt(1 + a t^2), a >= 0."""

    a: float = 0.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("RationalTime needs a >= 0 to stay positive")

    def value(self, t, x=None):
        t = np.asarray(t, dtype=float)
        return np.sqrt(1.0 + self.a * t * t)

    def dt(self, t, x=None):
        return self.a * np.asarray(t, dtype=float) / self.value(t)

    def dtt(self, t, x=None):
        return self.a / self.value(t) ** 3

    def to_dict(self):
        return {"kind": "rational_time", "a": self.a}


def conformal_factor_from_dict(d: dict | None) -> ConformalFactor:
    if d is None:
        return One()
    kind = d.get("kind", "one")
    if kind == "one":
        return One()
    if kind == "exp_time":
        return ExpTime(float(d["rate"]))
    if kind == "rational_time":
        return RationalTime(float(d["a"]))
    raise ValueError(f"unknown conformal factor kind {kind!r}")


# boundary transform

Method = Literal["auto", "closed", "projection", "quadrature"]


def _closed_form_ok(source: BulkSource, chi: ConformalFactor) -> bool:
    return source.is_gaussian and isinstance(chi, (One, ExpTime))


def _closed_form(source: BulkSource, chi: ConformalFactor, u: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    rate = chi.rate if isinstance(chi, ExpTime) else 0.0
    u = np.atleast_2d(u)
    out = np.zeros(np.broadcast_shapes((len(nodes), 1), u.shape))
    for tm in source.terms:
        s, w = tm.temporal.width, tm.spatial.width
        t0 = tm.temporal.center
        # exp(3 rate t) times a Gaussian is a shifted, rescaled Gaussian
        gain = np.exp(3.0 * rate * t0 + 4.5 * rate * rate * s * s)
        shift = t0 + 3.0 * rate * s * s
        sig2 = s * s + w * w
        pref = tm.amplitude * gain * (2.0 * np.pi) ** 1.5 * s * w**3 / np.sqrt(sig2)
        xi = u + (nodes @ np.array(tm.spatial.center))[:, None]
        out += pref * np.exp(-0.5 * (xi - shift) ** 2 / sig2)
    return out


def _projection(source: BulkSource, chi: ConformalFactor, u: np.ndarray, nodes: np.ndarray,
                n_line: int, chunk: int = 1 << 14) -> np.ndarray:
    if not chi.time_only:
        raise ValueError("projection route needs a time-only conformal factor")
    xg, wg = np.polynomial.legendre.leggauss(n_line)
    u = np.atleast_2d(u)
    shape = np.broadcast_shapes((len(nodes), 1), u.shape)
    out = np.zeros(shape)
    for tm in source.terms:
        tp, sp = tm.temporal, tm.spatial
        xi = np.broadcast_to(u + (nodes @ np.array(sp.center))[:, None], shape).ravel()
        acc = np.zeros_like(xi)
        for a in range(0, xi.size, chunk):
            x = xi[a:a + chunk]
            lo = np.maximum(-sp.radius, tp.center - tp.radius - x)
            hi = np.minimum(sp.radius, tp.center + tp.radius - x)
            live = hi > lo
            if not np.any(live):
                continue
            xl, lol, hil = x[live], lo[live], hi[live]
            half = 0.5 * (hil - lol)
            z = 0.5 * (hil + lol)[:, None] + half[:, None] * xg[None, :]
            t = xl[:, None] + z
            integrand = sp.projection(z) * tp(t) * chi.value(t) ** 3
            acc[a:a + chunk][live] = half * (integrand @ wg)
        out += tm.amplitude * acc.reshape(shape)
    return out


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by lower and upper corners."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec3(self.lo))
        object.__setattr__(self, "hi", _vec3(self.hi))

    @classmethod
    def around(cls, source: BulkSource, pad: float = 0.0) -> "Box":
        lo, hi = source.support_box()
        return cls(lo - pad, hi + pad)

    def contains(self, other: "Box", tol: float = 1e-12) -> bool:
        return bool(np.all(np.array(other.lo) >= np.array(self.lo) - tol)
                    and np.all(np.array(other.hi) <= np.array(self.hi) + tol))

    def nodes(self, n_quad: int):
        """Tensor Gauss-Legendre nodes (P, 3) and weights (P,)."""
        xg, wg = np.polynomial.legendre.leggauss(n_quad)
        lo, hi = np.array(self.lo), np.array(self.hi)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        axes = [mid[i] + half[i] * xg for i in range(3)]
        X, Y, Z = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
        w = (wg[:, None, None] * wg[None, :, None] * wg[None, None, :]).ravel() * np.prod(half)
        return pts, w


def _check_box(source: BulkSource, box: Box | None) -> Box:
    need = Box.around(source)
    if box is None:
        return need
    if not box.contains(need):
        raise SupportOverflow(f"source support {need} does not fit the quadrature box {box}")
    return box


class QuadratureRule:
    """Cached 3D nodes and per-term spatial factors over a box."""

    def __init__(self, source: BulkSource, box: Box | None = None, n_quad: int = 48):
        self.box = _check_box(source, box)
        self.pts, self.weights = self.box.nodes(n_quad)
        self.spatial = [tm.amplitude * tm.spatial(self.pts) * self.weights for tm in source.terms]
        self.temporal = [tm.temporal for tm in source.terms]


def upsilon_points(source: BulkSource, chi: ConformalFactor, u, n, box: Box | None = None,
                   n_quad: int = 48, rule: QuadratureRule | None = None) -> np.ndarray:
    """Brute-force 3D quadrature of the boundary transform at one direction."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = np.asarray(n, dtype=float)
    rule = rule or QuadratureRule(source, box, n_quad)
    nx = rule.pts @ n
    out = np.empty(u.size)
    for j, uj in enumerate(u):
        t = uj + nx
        c3 = chi.value(t) ** 3
        out[j] = sum(np.sum(sw * tp(t) * c3) for sw, tp in zip(rule.spatial, rule.temporal))
    return out


def upsilon(source: BulkSource, chi: ConformalFactor, sphere: SphereGrid, ugrid: UGrid,
            method: Method = "auto", box: Box | None = None, n_quad: int = 48,
            n_line: int = 96) -> BoundaryField:
    """Boundary transform of ``source`` sampled on ``sphere`` x ``ugrid``."""
    u = ugrid.nodes
    nodes = sphere.nodes
    if box is not None:
        _check_box(source, box)
    if source.is_zero:
        return BoundaryField(sphere, ugrid, np.zeros((sphere.size, ugrid.n_u)))
    if method == "auto":
        method = "closed" if _closed_form_ok(source, chi) else ("projection" if chi.time_only else "quadrature")
    if method == "closed":
        if not _closed_form_ok(source, chi):
            raise NonGaussianTerm("closed form needs Gaussian terms and chi = 1 or exp(rate t)")
        samples = _closed_form(source, chi, u, nodes)
    elif method == "projection":
        samples = _projection(source, chi, u, nodes, n_line)
    elif method == "quadrature":
        rule = QuadratureRule(source, box, n_quad)
        samples = np.array([upsilon_points(source, chi, u, n, rule=rule) for n in nodes])
    else:
        raise ValueError(f"unknown method {method!r}")
    return BoundaryField(sphere, ugrid, samples)


def upsilon_values(source: BulkSource, chi: ConformalFactor, u, nodes, n_line: int = 96) -> np.ndarray:
    """Boundary transform at per-node abscissae ``u`` of shape (nodes, k)."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    u = np.asarray(u, dtype=float)
    if source.is_zero:
        return np.zeros(np.broadcast_shapes((len(nodes), 1), np.atleast_2d(u).shape))
    if _closed_form_ok(source, chi):
        return _closed_form(source, chi, u, nodes)
    return _projection(source, chi, u, nodes, n_line)


def upsilon_fourier(source: BulkSource, n, energies) -> EProfile:
    """(2 pi)^(3/2) f_hat(E, E n), the energy profile of the transform for chi = 1."""
    if not source.is_gaussian:
        raise NonGaussianTerm("Fourier route needs all-Gaussian terms")
    energies = np.asarray(energies, dtype=float)
    n = np.asarray(n, dtype=float)
    vals = (2.0 * np.pi) ** 1.5 * source.fourier(energies, energies[:, None] * n[None, :])
    return EProfile(energies, vals)


# finite-v Kirchhoff representation

def _separable_parts(g, chi: ConformalFactor | None):
    """Return (temporal callables, spatial profiles, amplitudes) for chi^3 f."""
    if isinstance(g, BulkSource):
        chi = chi or One()
        if not chi.time_only:
            return None
        parts = []
        for tm in g.terms:
            tp = tm.temporal
            parts.append((lambda t, tp=tp: tp(t) * chi.value(t) ** 3, tm.spatial, tm.amplitude))
        return parts
    return None


def _orthonormal_frame(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = n / np.linalg.norm(n)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


@dataclass(frozen=True)
class AxialRule:
    """Cylindrical quadrature about the axis n.

    Gauss-Legendre in the axial coordinate z = n.x and the radial distance
    from the axis, periodic trapezoid in the azimuth.  The azimuthal average
    of each spatial profile is folded into the weights, so the integrand
    only has to be evaluated on the (z, radius) plane.
    """

    z: np.ndarray
    x2: np.ndarray
    spatial: tuple  # one weight vector per source term, over that term's own nodes

    @classmethod
    def build(cls, source: "BulkSource", n, n_axial: int = 64, n_radial: int = 64,
              n_azimuth: int = 96) -> "AxialRule":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        e1, e2 = _orthonormal_frame(n)
        xg, wg = np.polynomial.legendre.leggauss(n_axial)
        rg, rw = np.polynomial.legendre.leggauss(n_radial)
        phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
        ring = np.cos(phi)[:, None] * e1[None, :] + np.sin(phi)[:, None] * e2[None, :]
        zs, x2s, spatial = [], [], []
        for tm in source.terms:
            sp = tm.spatial
            c = np.array(sp.center)
            zc = float(c @ n)
            q0 = float(np.linalg.norm(c - zc * n))
            half = sp.radius
            z = zc + half * xg
            wz = half * wg
            r_max = q0 + sp.radius
            r = 0.5 * r_max * (rg + 1.0)
            wr = 0.5 * r_max * rw
            pts = (z[:, None, None, None] * n[None, None, None, :]
                   + r[None, :, None, None] * ring[None, None, :, :])
            zs.append(np.repeat(z, n_radial))
            x2s.append((z[:, None] ** 2 + r[None, :] ** 2).ravel())
            ring_avg = (2.0 * np.pi / n_azimuth) * sp(pts).sum(axis=2)
            spatial.append((tm.amplitude * ring_avg * wz[:, None] * (wr * r)[None, :]).ravel())
        return cls(np.concatenate(zs), np.concatenate(x2s), tuple(spatial))

    def term_weights(self) -> list[np.ndarray]:
        """Per-term weight vectors over the concatenated node list."""
        sizes = [len(w) for w in self.spatial]
        out = []
        start = 0
        for w, size in zip(self.spatial, sizes):
            full = np.zeros(sum(sizes))
            full[start:start + size] = w
            out.append(full)
            start += size
        return out


def kirchhoff_minkowski(g, u, v: float, n, chi: ConformalFactor | None = None,
                        box: Box | None = None, n_quad: int = 48, swap: bool = False,
                        chunk: int = 8, rule: Literal["axial", "cartesian"] = "axial",
                        axial: AxialRule | None = None) -> np.ndarray | float:
    """2/(v-u) * integral d^3x rho^-1 [g(t_ret, x) - g(t_adv, x)].

    Here rho = |n - 2x/(v-u)| and t_ret, t_adv = t -/+ |y - x| with y the
    event with null coordinates (u, v, n).  ``g`` is a :class:`BulkSource`
    (weighted by ``chi**3`` when ``chi`` is given) or a callable g(t, x)
    together with an explicit ``box``.  ``swap`` exchanges the two slots.

    Separable sources use the cylindrical rule about n by default; the
    ``cartesian`` rule is a tensor Gauss-Legendre grid with ``n_quad`` nodes
    per axis over the support box.  Nodes within 1e-8 of the singular ray
    rho = 0 are dropped.
    """
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = np.asarray(n, dtype=float)
    parts = _separable_parts(g, chi)
    if isinstance(g, BulkSource):
        if g.is_zero:
            return 0.0 if scalar else np.zeros(u.size)
        if box is not None:
            _check_box(g, box)
    elif chi is not None:
        raise ValueError("pass chi only with a BulkSource integrand")
    if parts is not None and rule == "axial":
        ax = axial or AxialRule.build(g, n)
        xn, x2 = ax.z, ax.x2
        spatial = ax.term_weights()
    else:
        if parts is None and box is None:
            raise ValueError("a callable integrand needs an explicit box")
        pts, wts = (box or Box.around(g)).nodes(n_quad)
        if parts is not None:
            spatial = [amp * sp(pts) * wts for _, sp, amp in parts]
            keep = np.zeros(len(pts), dtype=bool)
            for s in spatial:
                keep |= s != 0.0
            pts = pts[keep]
            spatial = [s[keep] for s in spatial]
        xn = pts @ n
        x2 = np.sum(pts * pts, axis=1)
    out = np.empty(u.size)
    for a in range(0, u.size, chunk):
        uu = u[a:a + chunk, None]
        d = v - uu
        if np.any(d <= 0):
            raise ValueError("need v > u")
        rho = np.sqrt(np.maximum(1.0 - 4.0 * xn[None, :] / d + 4.0 * x2[None, :] / (d * d), 0.0))
        mask = rho > 1e-8
        t_ret = 0.5 * v * (1.0 - rho) + 0.5 * uu * (1.0 + rho)
        t_adv = 0.5 * v * (1.0 + rho) + 0.5 * uu * (1.0 - rho)
        if swap:
            t_ret, t_adv = t_adv, t_ret
        inv = np.where(mask, 1.0 / np.where(mask, rho, 1.0), 0.0)
        if parts is not None:
            acc = np.zeros_like(rho)
            for (tf, _, _), s in zip(parts, spatial):
                acc += s[None, :] * (tf(t_ret) - tf(t_adv))
        else:
            acc = wts[None, :] * (g(t_ret, pts[None, :, :]) - g(t_adv, pts[None, :, :]))
        out[a:a + chunk] = 2.0 / d[:, 0] * np.sum(acc * inv, axis=1)
    return float(out[0]) if scalar else out


def rescaled_bulk(source: BulkSource, chi: ConformalFactor, u, v: float, n,
                  v_gauge: float = V_GAUGE, **kw) -> np.ndarray | float:
    """(1 + v^2)^(1/2) / 2 times the Kirchhoff integral of chi^3 f."""
    if v < v_gauge:
        raise GaugeRegion(f"v = {v} is below the gauge threshold {v_gauge}")
    return 0.5 * np.sqrt(1.0 + v * v) * kirchhoff_minkowski(source, u, v, n, chi=chi, **kw)


def auto_ugrid(source: BulkSource, n_u: int = 1024, margin: float = 8.0,
               chi: ConformalFactor | None = None) -> UGrid:
    """u window covering the transform's effective support plus a margin."""
    if not source.terms:
        return UGrid(-1.0, 1.0, n_u)
    los, his = [], []
    for tm in source.terms:
        tp, sp = tm.temporal, tm.spatial
        r0 = float(np.linalg.norm(sp.center))
        if tp.kind == "gaussian" and sp.kind == "gaussian":
            sig = np.hypot(tp.width, sp.width)
            shift = 3.0 * chi.rate * tp.width**2 if isinstance(chi, ExpTime) else 0.0
            los.append(tp.center + shift - r0 - margin * sig)
            his.append(tp.center + shift + r0 + margin * sig)
        else:
            pad = 0.25 * (tp.radius + sp.radius)
            los.append(tp.center - tp.radius - sp.radius - r0 - pad)
            his.append(tp.center + tp.radius + sp.radius + r0 + pad)
    return UGrid(float(min(los)), float(max(his)), n_u)

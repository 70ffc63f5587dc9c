"""Coordinate atlas of the compactified Minkowski space and cut functions.

Null coordinates are u = t - r and v = t + r, the compact ones are
U = arctan u and V = arctan v with T = V + U and R = V - U.  Points of
future null infinity are labelled by a retarded time u and a unit
direction n.  A cut function C on the sphere bounds the half-strip
{(u, n) : u > C(n)}; an apex x = (t, x) gives the cut n -> t - x.n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.special import sph_harm_y

from .discretization import SphereGrid
from .errors import DegenerateOrigin, NotInStrip

Gauge = Literal["advanced", "compact"]


def _unit(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise DegenerateOrigin("direction vector has zero length")
    return n / norm


@dataclass(frozen=True)
class CartesianEvent:
    t: float
    x: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", tuple(float(c) for c in np.asarray(self.x, dtype=float).reshape(3)))

    @property
    def xvec(self) -> np.ndarray:
        return np.array(self.x)

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.xvec))

    @property
    def n(self) -> np.ndarray:
        r = self.r
        if r == 0.0:
            raise DegenerateOrigin("direction undefined at r = 0")
        return self.xvec / r


@dataclass(frozen=True)
class NullCoords:
    u: float
    v: float
    n: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "n", tuple(float(c) for c in np.asarray(self.n, dtype=float).reshape(3)))
        if self.v < self.u:
            raise ValueError(f"advanced time {self.v} lies below retarded time {self.u}")

    @property
    def t(self) -> float:
        return 0.5 * (self.u + self.v)

    @property
    def r(self) -> float:
        return 0.5 * (self.v - self.u)


@dataclass(frozen=True)
class CompactCoords:
    U: float
    V: float
    n: tuple[float, float, float] = (0.0, 0.0, 1.0)

    @property
    def T(self) -> float:
        return self.V + self.U

    @property
    def R(self) -> float:
        return self.V - self.U


@dataclass(frozen=True)
class ScriPoint:
    u: float
    n: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "n", tuple(float(c) for c in _unit(self.n)))

    @property
    def nvec(self) -> np.ndarray:
        return np.array(self.n)


def to_null(e: CartesianEvent) -> NullCoords:
    r = e.r
    if r == 0.0:
        raise DegenerateOrigin("null coordinates need a direction; event sits at r = 0")
    return NullCoords(e.t - r, e.t + r, tuple(e.xvec / r))


def from_null(nc: NullCoords) -> CartesianEvent:
    r = 0.5 * (nc.v - nc.u)
    return CartesianEvent(0.5 * (nc.u + nc.v), tuple(r * np.asarray(nc.n)))


def to_compact(nc: NullCoords) -> CompactCoords:
    return CompactCoords(float(np.arctan(nc.u)), float(np.arctan(nc.v)), nc.n)


def from_compact(cc: CompactCoords) -> NullCoords:
    return NullCoords(float(np.tan(cc.U)), float(np.tan(cc.V)), cc.n)


def omega_gauge(chi, nc: NullCoords, gauge: Gauge = "advanced") -> float:
    """Conformal factor of the compactification in either gauge.

    ``advanced`` is 2 / (chi sqrt(1 + v^2)), which depends on v only;
    ``compact`` is cos(arctan u) cos(arctan v) / chi.  ``chi`` is a :class:`~scriholo.holography.ConformalFactor` (or any object
    with ``value(t, x)``); it is evaluated at the event with the given null
    coordinates.
    """
    x = nc.r * np.asarray(nc.n)
    c = float(chi.value(nc.t, x))
    if gauge == "advanced":
        return 2.0 / (c * np.sqrt(1.0 + nc.v * nc.v))
    if gauge == "compact":
        return float(np.cos(np.arctan(nc.u)) * np.cos(np.arctan(nc.v)) / c)
    raise ValueError(f"unknown gauge {gauge!r}")


def scri_limit_curve(x: CartesianEvent, n, lam: float) -> float:
    """Retarded time of the event x + lam*(1, n) in the frame at the origin.

    Uses the rationalized form, stable for large ``lam``; tends to t - x.n.
    """
    n = _unit(n)
    t, xv = x.t, x.xvec
    lam = float(lam)
    xn = float(xv @ n)
    x2 = float(xv @ xv)
    num = 2.0 * (t - xn) + (t * t - x2) / lam
    den = t / lam + 1.0 + np.sqrt(x2 / lam**2 + 1.0 + 2.0 * xn / lam)
    return float(num / den)


def causally_precedes(x: CartesianEvent, y: CartesianEvent) -> bool:
    """True when y lies in the causal future of x."""
    dt = y.t - x.t
    return dt >= 0.0 and dt * dt >= float(np.sum((y.xvec - x.xvec) ** 2))


# cut functions

class CutFunction:
    """Continuous function on the sphere bounding a half-strip of null infinity."""

    def __call__(self, n) -> np.ndarray | float:
        n = np.asarray(n, dtype=float)
        out = self.evaluate(n.reshape(-1, 3))
        return float(out[0]) if n.ndim == 1 else out.reshape(n.shape[:-1])

    def evaluate(self, nodes: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def values(self, grid: SphereGrid) -> np.ndarray:
        return self.evaluate(grid.nodes)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantCut(CutFunction):
    c: float = 0.0

    def evaluate(self, nodes):
        return np.full(len(nodes), float(self.c))

    def to_dict(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class ApexCut(CutFunction):
    """C(n) = t - x.n."""

    t: float
    x: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(c) for c in np.asarray(self.x, dtype=float).reshape(3)))

    def evaluate(self, nodes):
        return self.t - nodes @ np.array(self.x)

    @property
    def event(self) -> CartesianEvent:
        return CartesianEvent(self.t, self.x)

    def to_dict(self):
        return {"kind": "apex", "t": self.t, "x": list(self.x)}


def real_sph_harm(ell: int, m: int, nodes: np.ndarray) -> np.ndarray:
    """Orthonormal real spherical harmonic Y_{ell m} at unit vectors."""
    nodes = np.asarray(nodes, dtype=float)
    theta = np.arccos(np.clip(nodes[..., 2], -1.0, 1.0))
    phi = np.arctan2(nodes[..., 1], nodes[..., 0])
    y = sph_harm_y(ell, abs(m), theta, phi)
    if m > 0:
        return np.sqrt(2.0) * (-1) ** m * y.real
    if m < 0:
        return np.sqrt(2.0) * (-1) ** m * y.imag
    return y.real


@dataclass(frozen=True)
class HarmonicCut(CutFunction):
    """Finite real spherical-harmonic sum; ``coefficients`` maps (ell, m) to value."""

    coefficients: tuple[tuple[int, int, float], ...] = field(default=())

    @classmethod
    def from_mapping(cls, coeffs: dict) -> "HarmonicCut":
        return cls(tuple((int(l), int(m), float(c)) for (l, m), c in sorted(coeffs.items())))

    @property
    def degree(self) -> int:
        return max((l for l, _, _ in self.coefficients), default=0)

    def evaluate(self, nodes):
        out = np.zeros(len(nodes))
        for ell, m, c in self.coefficients:
            out += c * real_sph_harm(ell, m, nodes)
        return out

    def to_dict(self):
        return {"kind": "harmonic", "coefficients": [list(t) for t in self.coefficients]}


@dataclass(frozen=True, eq=False)
class TabulatedCut(CutFunction):
    """Cut values given on a sphere grid; off-grid evaluation is not supported."""

    grid: SphereGrid
    table: np.ndarray

    def evaluate(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.shape == self.grid.nodes.shape and np.allclose(nodes, self.grid.nodes, atol=1e-14):
            return np.array(self.table, dtype=float)
        # nearest grid node otherwise
        idx = np.argmax(nodes @ self.grid.nodes.T, axis=1)
        return np.asarray(self.table, dtype=float)[idx]

    def to_dict(self):
        return {"kind": "tabulated", "n_theta": self.grid.n_theta, "n_phi": self.grid.n_phi,
                "values": [float(v) for v in self.table]}


def project_harmonics(values: np.ndarray, grid: SphereGrid, max_degree: int) -> HarmonicCut:
    """Least-squares-free projection of node values onto real harmonics."""
    coeffs = []
    for ell in range(max_degree + 1):
        for m in range(-ell, ell + 1):
            c = float(grid.integrate(values * real_sph_harm(ell, m, grid.nodes)))
            coeffs.append((ell, m, c))
    return HarmonicCut(tuple(coeffs))


def cut_of_apex(x: CartesianEvent) -> ApexCut:
    return ApexCut(x.t, x.x)


def cut_from_dict(d: dict, grid: SphereGrid | None = None) -> CutFunction:
    kind = d.get("kind")
    if kind == "constant":
        return ConstantCut(float(d.get("c", 0.0)))
    if kind == "apex":
        return ApexCut(float(d["t"]), tuple(d["x"]))
    if kind == "harmonic":
        return HarmonicCut(tuple((int(l), int(m), float(c)) for l, m, c in d["coefficients"]))
    if kind == "tabulated":
        if grid is None:
            from .discretization import make_sphere_grid
            grid = make_sphere_grid(d["n_theta"], d["n_phi"])
        return TabulatedCut(grid, np.asarray(d["values"], dtype=float))
    raise ValueError(f"unknown cut kind {kind!r}")


STRICT_TOL = 1e-12


def in_deformed_cone(x: CartesianEvent, cut: CutFunction, grid: SphereGrid) -> bool:
    """Discrete test that the apex cut of x lies strictly above ``cut``."""
    gap = cut_of_apex(x).values(grid) - cut.values(grid)
    return bool(np.all(gap > STRICT_TOL))


def in_strip(y: ScriPoint, cut: CutFunction) -> bool:
    return y.u > cut(y.nvec)


def witness_apex(y: ScriPoint, cut: CutFunction, grid: SphereGrid) -> CartesianEvent:
    """Event x whose apex cut dominates ``cut`` on the grid and lies below y.

    Direction e = n_y and retarded time u halfway between C(n_y) and y.u;
    the advanced time v is pushed past the largest grid value of
    (2C(n) - u(1 + e.n)) / (1 - e.n) away from the pole e.n = 1.
    """
    e = y.nvec
    c_y = float(cut(e))
    if not y.u > c_y:
        raise NotInStrip(f"point u={y.u} is not above the cut value {c_y}")
    u = 0.5 * (c_y + y.u)
    cn = cut.values(grid)
    en = grid.nodes @ e
    mask = (1.0 - en) > 1e-6
    bound = np.max((2.0 * cn[mask] - u * (1.0 + en[mask])) / (1.0 - en[mask])) if np.any(mask) else u
    bound = float(bound)
    v = max(bound, u) + max(1.0, abs(bound))
    return CartesianEvent(0.5 * (u + v), tuple(0.5 * (v - u) * e))


def apex_cut_values(events: Sequence[CartesianEvent], grid: SphereGrid) -> np.ndarray:
    return np.array([cut_of_apex(x).values(grid) for x in events])

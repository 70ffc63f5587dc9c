"""Grids, quadrature, differentiation, interpolation and Fourier machinery.

Boundary fields live on a tensor grid made of a Gauss-Legendre x uniform
sphere grid and a uniform grid in the retarded time ``u``.  Everything that
touches the energy variable goes through a zero-padded DFT of the uniform
``u`` samples with the convention

    psi_hat(E) = (2 pi)^(-1/2) * integral psi(u) exp(i E u) du.
"""

from __future__ import annotations

import base64
import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BadSize, GridMismatch, NonMonotoneMap

FIELD_SCHEMA = "scri-holo/1/field"


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Product quadrature on the unit sphere.

    ``n_theta`` Gauss-Legendre nodes in cos(theta) times ``n_phi`` uniform
    longitudes.  Nodes are ordered theta-major.
    """

    n_theta: int
    n_phi: int
    cos_theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi

    @cached_property
    def theta(self) -> np.ndarray:
        return np.repeat(np.arccos(self.cos_theta), self.n_phi)

    @cached_property
    def phi_nodes(self) -> np.ndarray:
        return np.tile(self.phi, self.n_theta)

    def integrate(self, values) -> float | np.ndarray:
        """Sphere integral of node values (leading axis indexes nodes)."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def same_as(self, other: "SphereGrid") -> bool:
        return (self.n_theta, self.n_phi) == (other.n_theta, other.n_phi)


def make_sphere_grid(n_theta: int = 32, n_phi: int = 64) -> SphereGrid:
    if n_theta < 4 or n_phi < 8:
        raise BadSize(f"sphere grid needs n_theta >= 4 and n_phi >= 8, got ({n_theta}, {n_phi})")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    sin_theta = np.sqrt(1.0 - x * x)
    nodes = np.empty((n_theta, n_phi, 3))
    nodes[..., 0] = sin_theta[:, None] * np.cos(phi)[None, :]
    nodes[..., 1] = sin_theta[:, None] * np.sin(phi)[None, :]
    nodes[..., 2] = x[:, None]
    weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi)
    return SphereGrid(n_theta, n_phi, x, phi, nodes.reshape(-1, 3), weights)


@dataclass(frozen=True)
class UGrid:
    u_min: float
    u_max: float
    n_u: int

    def __post_init__(self):
        if self.n_u < 16:
            raise BadSize(f"u grid needs at least 16 nodes, got {self.n_u}")
        if not self.u_max > self.u_min:
            raise BadSize(f"empty u window [{self.u_min}, {self.u_max}]")

    @property
    def h(self) -> float:
        return (self.u_max - self.u_min) / (self.n_u - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.u_min + self.h * np.arange(self.n_u)

    @classmethod
    def around(cls, centers, widths, n_u: int = 1024, margin: float = 8.0) -> "UGrid":
        """Window covering ``centers`` padded by ``margin`` times the widths."""
        centers = np.atleast_1d(np.asarray(centers, dtype=float))
        widths = np.broadcast_to(np.asarray(widths, dtype=float), centers.shape)
        lo = float(np.min(centers - margin * widths))
        hi = float(np.max(centers + margin * widths))
        return cls(lo, hi, n_u)


def fd_derivative(y: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Fourth-order finite-difference derivative along ``axis``.

    Central five-point stencil in the interior, one-sided five-point
    stencils on the first and last two samples.
    """
    y = np.moveaxis(np.asarray(y, dtype=float), axis, -1)
    n = y.shape[-1]
    if n < 5:
        raise BadSize("need at least 5 samples for the derivative stencil")
    d = np.empty_like(y)
    d[..., 2:-2] = (y[..., :-4] - 8.0 * y[..., 1:-3] + 8.0 * y[..., 3:-1] - y[..., 4:]) / (12.0 * h)
    y0, y1, y2, y3, y4 = (y[..., k] for k in range(5))
    d[..., 0] = (-25.0 * y0 + 48.0 * y1 - 36.0 * y2 + 16.0 * y3 - 3.0 * y4) / (12.0 * h)
    d[..., 1] = (-3.0 * y0 - 10.0 * y1 + 18.0 * y2 - 6.0 * y3 + y4) / (12.0 * h)
    z0, z1, z2, z3, z4 = (y[..., -1 - k] for k in range(5))
    d[..., -1] = -(-25.0 * z0 + 48.0 * z1 - 36.0 * z2 + 16.0 * z3 - 3.0 * z4) / (12.0 * h)
    d[..., -2] = -(-3.0 * z0 - 10.0 * z1 + 18.0 * z2 - 6.0 * z3 + z4) / (12.0 * h)
    return np.moveaxis(d, -1, axis)


@dataclass(eq=False)
class BoundaryField:
    """Real samples psi(u, n) on ``sphere`` x ``ugrid``; shape (nodes, n_u)."""

    sphere: SphereGrid
    ugrid: UGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        expected = (self.sphere.size, self.ugrid.n_u)
        if self.samples.shape != expected:
            raise GridMismatch(f"samples have shape {self.samples.shape}, expected {expected}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("boundary field samples must be finite")

    @property
    def u(self) -> np.ndarray:
        return self.ugrid.nodes

    def with_samples(self, samples) -> "BoundaryField":
        return BoundaryField(self.sphere, self.ugrid, samples)

    def check_compatible(self, other: "BoundaryField") -> None:
        if not (self.sphere.same_as(other.sphere) and self.ugrid == other.ugrid):
            raise GridMismatch("boundary fields live on different grids")

    def edge_max(self) -> float:
        """Largest magnitude on the first and last u samples."""
        return float(max(np.max(np.abs(self.samples[:, 0])), np.max(np.abs(self.samples[:, -1]))))

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if self.samples.size else 0.0

    def is_edge_negligible(self, rtol: float = 1e-8, atol: float = 1e-300) -> bool:
        return self.edge_max() <= max(atol, rtol * self.peak())

    def __add__(self, other: "BoundaryField") -> "BoundaryField":
        self.check_compatible(other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "BoundaryField") -> "BoundaryField":
        self.check_compatible(other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, scalar: float) -> "BoundaryField":
        return self.with_samples(self.samples * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "BoundaryField":
        return self.with_samples(-self.samples)

    # serialization

    def to_csv(self, path=None) -> str:
        """RFC-4180 CSV with columns node, theta, phi, u, value."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["node", "theta", "phi", "u", "value"])
        theta, phi, u = self.sphere.theta, self.sphere.phi_nodes, self.u
        for k in range(self.sphere.size):
            for j in range(self.ugrid.n_u):
                writer.writerow([k, repr(float(theta[k])), repr(float(phi[k])),
                                 repr(float(u[j])), repr(float(self.samples[k, j]))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def to_json(self) -> dict:
        raw = np.ascontiguousarray(self.samples, dtype="<f8").tobytes()
        return {
            "schema": FIELD_SCHEMA,
            "sphere": {"n_theta": self.sphere.n_theta, "n_phi": self.sphere.n_phi},
            "u": {"u_min": self.ugrid.u_min, "u_max": self.ugrid.u_max, "n_u": self.ugrid.n_u},
            "dtype": "<f8",
            "samples_b64": base64.b64encode(raw).decode("ascii"),
        }

    @classmethod
    def from_json(cls, payload: Union[dict, str]) -> "BoundaryField":
        if isinstance(payload, str):
            payload = json.loads(payload)
        if payload.get("schema") != FIELD_SCHEMA:
            raise ValueError(f"unexpected field schema {payload.get('schema')!r}")
        sphere = make_sphere_grid(payload["sphere"]["n_theta"], payload["sphere"]["n_phi"])
        ug = UGrid(payload["u"]["u_min"], payload["u"]["u_max"], payload["u"]["n_u"])
        data = np.frombuffer(base64.b64decode(payload["samples_b64"]), dtype="<f8")
        return cls(sphere, ug, data.reshape(sphere.size, ug.n_u).copy())


def zeros_field(sphere: SphereGrid, ugrid: UGrid) -> BoundaryField:
    return BoundaryField(sphere, ugrid, np.zeros((sphere.size, ugrid.n_u)))


def field_from_function(sphere: SphereGrid, ugrid: UGrid,
                        fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> BoundaryField:
    """Sample ``fn(u, n)`` with u of shape (1, n_u) and n of shape (nodes, 1, 3)."""
    u = ugrid.nodes[None, :]
    n = sphere.nodes[:, None, :]
    values = np.broadcast_to(fn(u, n), (sphere.size, ugrid.n_u))
    return BoundaryField(sphere, ugrid, np.array(values, dtype=float))


def d_du(f: BoundaryField) -> BoundaryField:
    return f.with_samples(fd_derivative(f.samples, f.ugrid.h, axis=1))


@dataclass(eq=False)
class EProfile:
    """Positive-energy Fourier data on the DFT energy grid.

    ``energies`` starts at E = 0 and is uniform with spacing ``dE``;
    ``values`` has the energy axis last (one row per sphere node, or 1-D).
    """

    energies: np.ndarray
    values: np.ndarray
    node: int | None = None

    @property
    def dE(self) -> float:
        return float(self.energies[1] - self.energies[0])


def _padded_length(n: int, pad: int) -> int:
    if pad < 4:
        raise BadSize("zero-padding factor must be at least 4")
    return int(pad * n)


def fourier_samples(samples: np.ndarray, ugrid: UGrid, pad: int = 4):
    """Continuous Fourier transform of real samples at E_m >= 0.

    Returns ``(energies, values)`` with the energy axis last.
    """
    samples = np.asarray(samples, dtype=float)
    n_pad = _padded_length(ugrid.n_u, pad)
    h = ugrid.h
    energies = 2.0 * np.pi * np.fft.rfftfreq(n_pad, d=h)
    spectrum = np.conj(np.fft.rfft(samples, n=n_pad, axis=-1))
    values = spectrum * (h / np.sqrt(2.0 * np.pi)) * np.exp(1j * energies * ugrid.u_min)
    return energies, values


def fourier_full(samples: np.ndarray, ugrid: UGrid, pad: int = 4):
    """Two-sided version of :func:`fourier_samples` on the full DFT period."""
    samples = np.asarray(samples, dtype=float)
    n_pad = _padded_length(ugrid.n_u, pad)
    h = ugrid.h
    energies = 2.0 * np.pi * np.fft.fftfreq(n_pad, d=h)
    spectrum = np.conj(np.fft.fft(samples, n=n_pad, axis=-1))
    values = spectrum * (h / np.sqrt(2.0 * np.pi)) * np.exp(1j * energies * ugrid.u_min)
    return energies, values


def e_profile(f: BoundaryField, node: int | None = None, pad: int = 4) -> EProfile:
    """Fourier profile of one node (or all nodes when ``node`` is None)."""
    samples = f.samples if node is None else f.samples[node]
    energies, values = fourier_samples(samples, f.ugrid, pad)
    return EProfile(energies, values, node)


class PiecewiseCubic:
    """Cubic spline through uniform samples, evaluable at per-row abscissae.

    ``samples`` has shape (rows, n); each row gets its own not-a-knot spline
    and :meth:`__call__` takes abscissae of shape (rows, k).
    """

    def __init__(self, ugrid: UGrid, samples: np.ndarray):
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        self.ugrid = ugrid
        spline = CubicSpline(ugrid.nodes, samples.T, axis=0)
        # (4, n-1, rows) -> (rows, n-1, 4), highest power first
        self.coef = np.ascontiguousarray(np.transpose(spline.c, (2, 1, 0)))
        self.rows = samples.shape[0]

    def cell_index(self, x: np.ndarray) -> np.ndarray:
        g = self.ugrid
        idx = np.floor((x - g.u_min) / g.h).astype(np.int64)
        return np.clip(idx, 0, g.n_u - 2)

    def __call__(self, x: np.ndarray, derivative: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = np.broadcast_to(x, (self.rows, x.size))
        idx = self.cell_index(x)
        dx = x - (self.ugrid.u_min + idx * self.ugrid.h)
        rows = np.arange(self.rows)[:, None]
        c = self.coef[rows, idx]  # (rows, k, 4)
        if derivative == 0:
            return ((c[..., 0] * dx + c[..., 1]) * dx + c[..., 2]) * dx + c[..., 3]
        if derivative == 1:
            return (3.0 * c[..., 0] * dx + 2.0 * c[..., 1]) * dx + c[..., 2]
        raise ValueError("only derivative 0 or 1 is supported")


MapLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def resample(f: BoundaryField, mapping: MapLike) -> BoundaryField:
    """New field g(u, n) = f(mapping(u, n), n) by cubic-spline interpolation.

    ``mapping`` is either an array of shape (nodes, n_u) holding the mapped
    abscissae, or a callable taking the u nodes broadcast to (nodes, n_u) and
    returning the mapped abscissae.  Values outside the window are zero.
    """
    u = np.broadcast_to(f.u, f.samples.shape)
    x = mapping(u) if callable(mapping) else np.asarray(mapping, dtype=float)
    x = np.broadcast_to(x, f.samples.shape)
    if np.any(np.diff(x, axis=1) <= 0.0):
        raise NonMonotoneMap("u reparametrization must be strictly increasing at every node")
    spline = PiecewiseCubic(f.ugrid, f.samples)
    out = spline(x)
    g = f.ugrid
    tol = 1e-12 * max(1.0, abs(g.u_min), abs(g.u_max))
    outside = (x < g.u_min - tol) | (x > g.u_max + tol)
    out[outside] = 0.0
    return f.with_samples(out)

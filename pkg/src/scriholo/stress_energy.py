"""Null-null stress component of the bulk solution and its entropy density.

For chi depending on t only, at fixed advanced time v and direction n the
bulk solution is Phi = chi^-1 K(chi^3 f) with K the Kirchhoff integral, and
with Omega = 2 chi^-1 (1 + v^2)^(-1/2) the combination

    Omega^-2 T_uu + 1/3 R_uu (Omega^-1 Phi)^2 + 1/6 d_u^2 (Omega^-2 Phi^2)

equals (d_u (Omega^-1 Phi))^2 identically.  Integrating it with the weight
pi (u - C) reproduces the boundary entropy as v grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .discretization import SphereGrid, UGrid, fd_derivative
from .errors import GaugeRegion
from .geometry import CutFunction
from .holography import V_GAUGE, BulkSource, ConformalFactor, kirchhoff_minkowski


def r_uu(chi: ConformalFactor, t, x=None):
    """chi^-2 [4 (d_u chi)^2 - 2 chi d_u^2 chi]."""
    c = chi.value(t, x)
    cu = chi.du(t, x)
    cuu = chi.duu(t, x)
    return (4.0 * cu * cu - 2.0 * c * cuu) / (c * c)


@dataclass(frozen=True)
class NullStressSample:
    u: float
    v: float
    node: int
    T_uu: float
    R_uu: float
    Phi: float
    Psi: float


def _event_time(u, v):
    return 0.5 * (np.asarray(u, dtype=float) + v)


def t_uu(phi: np.ndarray, u: np.ndarray, chi: ConformalFactor, v: float) -> np.ndarray:
    """T_uu = (d_u Phi)^2 - R_uu Phi^2 / 6 - [d_u^2 - 2 (d_u ln chi) d_u](Phi^2) / 6.

    ``phi`` holds samples on the uniform grid ``u`` (last axis) at fixed v.
    """
    u = np.asarray(u, dtype=float)
    h = u[1] - u[0]
    phi = np.asarray(phi, dtype=float)
    t = _event_time(u, v)
    dphi = fd_derivative(phi, h)
    phi2 = phi * phi
    d_phi2 = fd_derivative(phi2, h)
    dd_phi2 = fd_derivative(d_phi2, h)
    dlog = chi.du(t) / chi.value(t)
    return dphi**2 - r_uu(chi, t) * phi2 / 6.0 - (dd_phi2 - 2.0 * dlog * d_phi2) / 6.0


def bulk_field(source: BulkSource, chi: ConformalFactor, sphere: SphereGrid, ugrid: UGrid,
               v: float, n_quad: int = 48) -> np.ndarray:
    """Phi(u, v, n) = chi^-1 K(chi^3 f) on the node x u grid."""
    u = ugrid.nodes
    scale = 1.0 / chi.value(_event_time(u, v))
    out = np.empty((sphere.size, ugrid.n_u))
    for k, n in enumerate(sphere.nodes):
        out[k] = scale * kirchhoff_minkowski(source, u, v, n, chi=chi, n_quad=n_quad)
    return out


@dataclass(eq=False)
class StressDensity:
    u: np.ndarray
    v: float
    phi: np.ndarray
    psi: np.ndarray
    T_uu: np.ndarray
    R_uu: np.ndarray
    density: np.ndarray
    square: np.ndarray

    @property
    def identity_residual(self) -> float:
        """max |density - (d_u Psi)^2| relative to max (d_u Psi)^2."""
        scale = float(np.max(np.abs(self.square)))
        if scale == 0.0:
            return float(np.max(np.abs(self.density)))
        return float(np.max(np.abs(self.density - self.square)) / scale)

    def sample(self, node: int, j: int) -> NullStressSample:
        return NullStressSample(float(self.u[j]), self.v, node, float(self.T_uu[node, j]),
                                float(self.R_uu[j]), float(self.phi[node, j]), float(self.psi[node, j]))


def stress_density(phi: np.ndarray, u: np.ndarray, chi: ConformalFactor, v: float,
                   printed_signs: bool = False) -> StressDensity:
    """Assemble the entropy density from samples of Phi at fixed v.

    ``printed_signs`` flips the R_uu and d_u^2 terms to minus signs, a variant
    that does not reduce to (d_u Psi)^2 and is kept for comparison.
    """
    u = np.asarray(u, dtype=float)
    h = u[1] - u[0]
    t = _event_time(u, v)
    inv_omega = 0.5 * chi.value(t) * np.sqrt(1.0 + v * v)
    psi = inv_omega * phi
    tuu = t_uu(phi, u, chi, v)
    ruu = np.broadcast_to(r_uu(chi, t), u.shape).astype(float)
    psi2 = psi * psi
    dd = fd_derivative(fd_derivative(psi2, h), h)
    sign = -1.0 if printed_signs else 1.0
    dens = inv_omega**2 * tuu + sign * (ruu * psi2 / 3.0 + dd / 6.0)
    square = fd_derivative(psi, h) ** 2
    return StressDensity(u, v, phi, psi, tuu, ruu, dens, square)


def _weighted_tail(values: np.ndarray, u: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Per row pi * integral_c^{u_max} (u - c) values du by cubic-spline quadrature."""
    out = np.zeros(values.shape[0])
    for k in range(values.shape[0]):
        if c[k] >= u[-1]:
            continue
        sp = CubicSpline(u, (u - c[k]) * values[k])
        out[k] = np.pi * sp.integrate(max(c[k], u[0]), u[-1])
    return out


@dataclass(frozen=True)
class StressEntropy:
    value: float
    v: float
    identity_residual: float
    per_angle: np.ndarray

    def to_json(self) -> dict:
        return {"stress_tensor": {"v": self.v, "entropy": self.value,
                                  "identity_residual": self.identity_residual}}


def entropy_from_stress(source: BulkSource, chi: ConformalFactor, cut, v: float,
                        sphere: SphereGrid, ugrid: UGrid, n_quad: int = 48,
                        printed_signs: bool = False, v_gauge: float = V_GAUGE) -> StressEntropy:
    """pi * integral over the sphere and u > C of (u - C) times the stress density."""
    if v < v_gauge:
        raise GaugeRegion(f"v = {v} is below the gauge threshold {v_gauge}")
    phi = bulk_field(source, chi, sphere, ugrid, v, n_quad)
    sd = stress_density(phi, ugrid.nodes, chi, v, printed_signs)
    c = cut.values(sphere) if isinstance(cut, CutFunction) else np.broadcast_to(
        np.asarray(cut, dtype=float), (sphere.size,))
    per = _weighted_tail(sd.density, ugrid.nodes, np.asarray(c, dtype=float))
    return StressEntropy(float(sphere.integrate(per)), v, sd.identity_residual, per)

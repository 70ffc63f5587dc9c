"""One-particle inner products of the chiral current and of the boundary theory.

Per direction the complex inner product is

    <f, h> = integral_0^inf E f_hat(E) conj(h_hat(E)) dE,

whose real part is the symmetric product 1/2 integral |E| conj(f_hat) h_hat dE
over the full line and whose imaginary part is the symplectic form
beta(f, h) = 1/2 integral f'(u) h(u) du.  The boundary product integrates the
per-direction product over the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discretization import (BoundaryField, SphereGrid, UGrid, fd_derivative, fourier_full,
                             fourier_samples, make_sphere_grid)
from .errors import GridMismatch, NonGaussianTerm


@dataclass(eq=False)
class HalfLineProfile:
    """Real function of u sampled on a uniform grid (one direction of a field)."""

    ugrid: UGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float).reshape(-1)
        if self.samples.size != self.ugrid.n_u:
            raise GridMismatch("profile length does not match its u grid")

    @classmethod
    def from_field(cls, f: BoundaryField, node: int) -> "HalfLineProfile":
        return cls(f.ugrid, f.samples[node])

    @classmethod
    def from_function(cls, ugrid: UGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "HalfLineProfile":
        return cls(ugrid, fn(ugrid.nodes))

    def __add__(self, other):
        _same_grid(self, other)
        return HalfLineProfile(self.ugrid, self.samples + other.samples)

    def __mul__(self, c):
        return HalfLineProfile(self.ugrid, float(c) * self.samples)

    __rmul__ = __mul__


def _same_grid(f, h) -> None:
    if f.ugrid != h.ugrid:
        raise GridMismatch("profiles live on different u grids")


def _endpoint_correction(prod: np.ndarray, dE: float) -> np.ndarray:
    """Euler-Maclaurin terms at E = 0 for the trapezoid sum of E * prod(E).

    With F = E * prod the terms are dE^2/12 F'(0) - dE^4/720 F'''(0), where
    F'(0) = prod(0) and F'''(0) = 3 prod''(0).  The curvature uses a
    one-sided fourth-order stencil, so no symmetry of prod is assumed.
    """
    p = [prod[..., k] for k in range(6)]
    curv = (45.0 * p[0] - 154.0 * p[1] + 214.0 * p[2] - 156.0 * p[3] + 61.0 * p[4] - 10.0 * p[5]) / 12.0
    # curv holds dE^2 prod''(0)
    return dE * dE * (p[0] / 12.0 - curv / 240.0)


def positive_energy_integral(fhat: np.ndarray, hhat: np.ndarray, dE: float) -> np.ndarray:
    """integral_0^inf E fhat conj(hhat) dE on a uniform grid starting at E = 0.

    Trapezoid rule with the endpoint corrections at E = 0, where the
    integrand vanishes linearly.
    """
    prod = fhat * np.conj(hhat)
    energies = dE * np.arange(prod.shape[-1])
    body = dE * np.sum(energies * prod, axis=-1)
    return body + _endpoint_correction(prod, dE)


def beta_rows(f: np.ndarray, h: np.ndarray, ugrid: UGrid) -> np.ndarray:
    fp = fd_derivative(f, ugrid.h, axis=-1)
    return 0.5 * np.trapezoid(fp * h, dx=ugrid.h, axis=-1)


def complex_ip_rows(f: np.ndarray, h: np.ndarray, ugrid: UGrid, pad: int = 4) -> np.ndarray:
    energies, fhat = fourier_samples(f, ugrid, pad)
    _, hhat = fourier_samples(h, ugrid, pad)
    return positive_energy_integral(fhat, hhat, energies[1] - energies[0])


def beta(f: HalfLineProfile, h: HalfLineProfile) -> float:
    """Symplectic form 1/2 integral f' h du."""
    _same_grid(f, h)
    return float(beta_rows(f.samples, h.samples, f.ugrid))


def real_ip(f: HalfLineProfile, h: HalfLineProfile, pad: int = 4) -> float:
    """1/2 integral over the full line of |E| conj(f_hat) h_hat dE."""
    _same_grid(f, h)
    energies, fhat = fourier_full(f.samples, f.ugrid, pad)
    _, hhat = fourier_full(h.samples, h.ugrid, pad)
    dE = abs(energies[1] - energies[0])
    prod = np.conj(fhat) * hhat
    val = 0.5 * dE * np.sum(np.abs(energies) * prod) + _endpoint_correction(prod, dE)
    return float(val.real)


def complex_ip(f: HalfLineProfile, h: HalfLineProfile, pad: int = 4) -> complex:
    _same_grid(f, h)
    return complex(complex_ip_rows(f.samples, h.samples, f.ugrid, pad))


def _check_fields(psi: BoundaryField, chi: BoundaryField) -> None:
    psi.check_compatible(chi)


def boundary_ip(psi: BoundaryField, phi: BoundaryField, pad: int = 4, chunk: int = 256) -> complex:
    """Sphere integral of the per-direction complex inner product."""
    _check_fields(psi, phi)
    per_node = np.empty(psi.sphere.size, dtype=complex)
    for a in range(0, psi.sphere.size, chunk):
        sl = slice(a, a + chunk)
        per_node[sl] = complex_ip_rows(psi.samples[sl], phi.samples[sl], psi.ugrid, pad)
    return complex(psi.sphere.integrate(per_node))


def boundary_norm2(psi: BoundaryField, pad: int = 4) -> float:
    return float(boundary_ip(psi, psi, pad).real)


def sigma_boundary(psi1: BoundaryField, psi2: BoundaryField) -> float:
    """1/2 integral (psi2 d_u psi1 - psi1 d_u psi2) du dS^2."""
    _check_fields(psi1, psi2)
    h = psi1.ugrid.h
    d1 = fd_derivative(psi1.samples, h, axis=1)
    d2 = fd_derivative(psi2.samples, h, axis=1)
    dens = 0.5 * np.trapezoid(psi2.samples * d1 - psi1.samples * d2, dx=h, axis=1)
    return float(psi1.sphere.integrate(dens))


def kg_momentum_norm(source, sphere: SphereGrid | None = None, n_energy: int = 160) -> float:
    """(2 pi)^3 integral over momenta p of |f_hat(|p|, p)|^2 / |p|.

    Computed as a spherical-momentum quadrature, E-integral by Gauss-Legendre
    over the range where the Gaussian transform is non-negligible.
    """
    if not source.is_gaussian:
        raise NonGaussianTerm("momentum-space norm needs all-Gaussian terms")
    if source.is_zero:
        return 0.0
    sphere = sphere or make_sphere_grid(32, 64)
    widest = min(np.hypot(tm.temporal.width, tm.spatial.width) for tm in source.terms)
    e_max = 12.0 / widest
    xg, wg = np.polynomial.legendre.leggauss(n_energy)
    energies = 0.5 * e_max * (xg + 1.0)
    ew = 0.5 * e_max * wg
    k = energies[None, :, None] * sphere.nodes[:, None, :]
    fhat = source.fourier(np.broadcast_to(energies, k.shape[:-1]), k)
    radial = (np.abs(fhat) ** 2 * energies[None, :]) @ ew
    return float((2.0 * np.pi) ** 3 * sphere.integrate(radial))


def epsilon_kernel_ip(f: HalfLineProfile | Callable, h: HalfLineProfile | Callable,
                      eps: float, window: tuple[float, float] | None = None,
                      step: float | None = None, chunk: int = 512) -> complex:
    """-(2 pi)^-1 double integral f(u) h(u') / (u - u' + i eps)^2 du du'.

    Brute-force O(N^2) trapezoid sum; the kernel is resolved with a step of
    at most eps/5.  Callables are sampled on a fresh grid over ``window``.
    """
    if callable(f) or callable(h):
        if window is None:
            raise ValueError("window required for callable inputs")
        step = step or eps / 5.0
        n = int(np.ceil((window[1] - window[0]) / step)) + 1
        u = np.linspace(window[0], window[1], n)
        fs = f(u) if callable(f) else np.interp(u, f.ugrid.nodes, f.samples)
        hs = h(u) if callable(h) else np.interp(u, h.ugrid.nodes, h.samples)
        du = u[1] - u[0]
    else:
        _same_grid(f, h)
        u, fs, hs, du = f.ugrid.nodes, f.samples, h.samples, f.ugrid.h
        if du > eps / 5.0:
            raise ValueError("grid too coarse for the requested eps")
    total = 0.0 + 0.0j
    for a in range(0, u.size, chunk):
        diff = u[a:a + chunk, None] - u[None, :]
        kern = 1.0 / (diff + 1j * eps) ** 2
        total += fs[a:a + chunk] @ (kern @ hs)
    return complex(-total * du * du / (2.0 * np.pi))


def richardson(values, ratio: float = 2.0) -> complex:
    """Richardson extrapolation to zero for a sequence at h, h/ratio, h/ratio^2, ..."""
    table = [complex(v) for v in values]
    order = 1
    while len(table) > 1:
        fac = ratio**order
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        order += 1
    return table[0]


def epsilon_kernel_limit(f, h, eps_values=(0.1, 0.05, 0.025), **kw) -> complex:
    return richardson([epsilon_kernel_ip(f, h, e, **kw) for e in eps_values])

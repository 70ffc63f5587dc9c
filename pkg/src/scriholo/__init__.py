"""Numerical holography of a conformally coupled scalar at future null infinity."""

from .discretization import BoundaryField, SphereGrid, UGrid, make_sphere_grid
from .geometry import ApexCut, ConstantCut, HarmonicCut, TabulatedCut
from .holography import BulkSource, ExpTime, One, RationalTime, kirchhoff_minkowski, upsilon
from .modular_entropy import anec, deformation_scan, entropy, modular_flow, modular_form
from .one_particle import beta, boundary_ip, complex_ip, real_ip, sigma_boundary
from .stress_energy import entropy_from_stress

__all__ = [
    "ApexCut", "BoundaryField", "BulkSource", "ConstantCut", "ExpTime", "HarmonicCut", "One",
    "RationalTime", "SphereGrid", "TabulatedCut", "UGrid", "anec", "beta", "boundary_ip",
    "complex_ip", "deformation_scan", "entropy", "entropy_from_stress", "kirchhoff_minkowski",
    "make_sphere_grid", "modular_flow", "modular_form", "real_ip", "sigma_boundary", "upsilon",
]

"""
qvol - Quantum invariants and hyperbolic cone-manifold volumes for fillings of the figure-eight knot.

This package evaluates relative Reshetikhin-Turaev invariants at odd levels,
solves for the cone geometries they are conjectured to detect, and compares
the two through saddle-point predictions and Poisson summation.
"""

__version__ = "0.1.0"

from .cfrac import SurgeryPresentation
from .cli import main
from .fourier import poisson_check, predict_leading, verify_volume_conjecture
from .geom import ConeGeometry, cone_family, solve_critical
from .qinv import rt_invariant
from .specfun import dilog, lobachevsky, quantum_dilog

__all__ = [
    "SurgeryPresentation",
    "ConeGeometry",
    "cone_family",
    "dilog",
    "lobachevsky",
    "main",
    "poisson_check",
    "predict_leading",
    "quantum_dilog",
    "rt_invariant",
    "solve_critical",
    "verify_volume_conjecture",
]

"""Numerical laboratory for Green's functions of the Laplacian on smooth bounded domains.

Submodules
----------
geometry
    Star-shaped test domains, boundary charts and quadrature.
kernels
    Fundamental solution, its derivatives and closed-form Green's functions.
solver
    Collocation solver for the regular part of the Dirichlet and Neumann Green's functions.
analysis
    Empirical checks of derivative bounds, Hölder estimates, cancellation and reflection identities.
appendix
    Boundary-respecting cutoffs, Caccioppoli and scaled embedding checks.
cli
    Config-driven experiment runner.
"""

from .geometry import Ball, Ellipsoid, HalfSpace, PerturbedBall, make_domain
from .kernels import DIRICHLET, NEUMANN, kernel
from .solver import GreenFunction, SolverError, SolverSettings

__all__ = [
    "Ball",
    "Ellipsoid",
    "HalfSpace",
    "PerturbedBall",
    "make_domain",
    "DIRICHLET",
    "NEUMANN",
    "kernel",
    "GreenFunction",
    "SolverError",
    "SolverSettings",
]
__version__ = "0.1.0"

"""Numerical desingularization of point-vortex equilibria into vortex-patch
relative equilibria for the generalized surface quasi-geostrophic family
(kernel order alpha in [1, 2)), plus verification of every closed-form
ingredient: kernel constants, linearization spectra, non-degeneracy
Jacobians, integral identities, first-order boundary asymptotics, convexity.
"""

__version__ = "0.1.0"

from . import contour, linop, pointvortex, solver, specialfn, validate
from .contour import Patch, PatchEnsemble, PatchShape, ResidualSpectrum
from .pointvortex import (FamilyKind, MotionKind, PointVortexConfiguration,
                          corotating_pair, stationary_tripole, traveling_pair)
from .solver import ContinuationSettings, SolutionBranch, desingularize
from .specialfn import AlphaParameter

__all__ = [
    "__version__",
    "AlphaParameter",
    "PointVortexConfiguration",
    "MotionKind",
    "FamilyKind",
    "corotating_pair",
    "traveling_pair",
    "stationary_tripole",
    "PatchShape",
    "Patch",
    "PatchEnsemble",
    "ResidualSpectrum",
    "ContinuationSettings",
    "SolutionBranch",
    "desingularize",
    "contour",
    "linop",
    "pointvortex",
    "solver",
    "specialfn",
    "validate",
]

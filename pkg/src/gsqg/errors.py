"""Exception types shared across the solver library."""


class GsqgError(Exception):
    """Base class for all library errors."""


class QuadratureError(GsqgError):
    """Quadrature refinement failed to meet the requested tolerance."""


class DivergenceError(GsqgError):
    """Kernel evaluation at (nearly) coincident points."""


class CollisionError(GsqgError):
    """Orbit integration approached a vortex collision."""


class OverlapError(GsqgError):
    """Patch supports intersect (disjointness precondition violated)."""


class RangeViolationError(GsqgError):
    """Right-hand side contains content outside the invertible range."""


class RankDeficiencyError(GsqgError):
    """Least-squares system lost column rank beyond the threshold."""


class NondegeneracyError(GsqgError):
    """Configuration fails the non-degeneracy requirement."""


class ConvergenceError(GsqgError):
    """Iterative corrector failed to converge within its iteration cap."""

"""Point-vortex system: dynamics, equilibrium residual, non-degeneracy.

The N-vortex interaction of the fractional model is

    dw_i/dt = (C^/2) sum_{j != i} g_j (w_i - w_j)^perp / |w_i - w_j|^(a+2),

with perp the counterclockwise quarter turn.  Relative equilibria solve the
algebraic system (unrotated components, speed paired with the first axis)

    P_i = Om w_i + U e1 - (C^/2) sum_{j != i} g_j (w_i - w_j)/|w_i - w_j|^(a+2) = 0.

With these two conventions a root of P rotates rigidly at angular velocity Om
(counterclockwise) or translates at speed U along the second axis; the pairing
is pinned down by the rigid-motion integration tests rather than assumed.

Parameter vector ordering used for Jacobians and non-degeneracy splits:

    lambda = (w_11, ..., w_N1, w_12, ..., w_N2, g_1, ..., g_N, Om, U)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CollisionError, DivergenceError, NondegeneracyError
from .specialfn import _as_alpha, point_vortex_constant

__all__ = [
    "MotionKind",
    "FamilyKind",
    "PointVortexConfiguration",
    "NondegeneracyReport",
    "vortex_velocity",
    "integrate_orbit",
    "equilibrium_residual",
    "equilibrium_jacobian",
    "analytic_jacobian",
    "nondegeneracy_report",
    "corotating_pair",
    "traveling_pair",
    "stationary_tripole",
    "interaction_energy",
    "circulation_moment",
]

_MIN_SEPARATION = 1e-12


class MotionKind(str, Enum):
    ROTATING = "rotating"
    TRAVELING = "traveling"
    STATIONARY = "stationary"


class FamilyKind(str, Enum):
    COROTATING_PAIR = "corotating_pair"
    TRAVELING_PAIR = "traveling_pair"
    STATIONARY_TRIPOLE = "stationary_tripole"


@dataclass(frozen=True)
class PointVortexConfiguration:
    """Immutable N-vortex state plus rigid-motion parameters."""

    alpha: float
    centers: np.ndarray          # (N, 2)
    circulations: np.ndarray     # (N,)
    omega: float = 0.0
    speed: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_alpha(self.alpha))
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        g = np.atleast_1d(np.asarray(self.circulations, dtype=float))
        if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] < 1:
            raise ValueError(f"centers must be (N, 2), got {c.shape}")
        if g.shape != (c.shape[0],):
            raise ValueError("one circulation per vortex required")
        if np.any(g == 0.0):
            raise ValueError("circulations must be non-zero")
        if c.shape[0] > 1:
            d = c[:, None, :] - c[None, :, :]
            dist = np.hypot(d[..., 0], d[..., 1])
            np.fill_diagonal(dist, np.inf)
            if dist.min() == 0.0:
                raise ValueError("vortex centers must be pairwise distinct")
        c.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "circulations", g)
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "speed", float(self.speed))
        if self.omega != 0.0 and self.speed != 0.0:
            raise ValueError("at most one of omega, speed may be non-zero")

    @property
    def n_vortices(self) -> int:
        return self.centers.shape[0]

    @property
    def motion_kind(self) -> MotionKind:
        if self.omega != 0.0:
            return MotionKind.ROTATING
        if self.speed != 0.0:
            return MotionKind.TRAVELING
        return MotionKind.STATIONARY

    # lambda-vector <-> configuration ------------------------------------
    def lambda_vector(self) -> np.ndarray:
        """(w_11..w_N1, w_12..w_N2, g_1..g_N, Om, U)."""
        return np.concatenate([self.centers[:, 0], self.centers[:, 1],
                               self.circulations, [self.omega, self.speed]])

    def with_lambda(self, lam: np.ndarray) -> "PointVortexConfiguration":
        lam = np.asarray(lam, dtype=float)
        n = self.n_vortices
        if lam.shape != (3 * n + 2,):
            raise ValueError(f"lambda vector must have length {3 * n + 2}")
        centers = np.stack([lam[:n], lam[n:2 * n]], axis=1)
        return PointVortexConfiguration(self.alpha, centers, lam[2 * n:3 * n],
                                        omega=lam[3 * n], speed=lam[3 * n + 1])

    def lambda_labels(self) -> list[str]:
        n = self.n_vortices
        return ([f"w_{i+1}1" for i in range(n)] + [f"w_{i+1}2" for i in range(n)]
                + [f"g_{i+1}" for i in range(n)] + ["Omega", "U"])


@dataclass
class NondegeneracyReport:
    free_parameter_indices: list[int]
    jacobian: np.ndarray
    rank: int
    codim: int
    passes: bool
    motion_kind: MotionKind
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _pairwise_terms(config: PointVortexConfiguration) -> np.ndarray:
    """sum_j g_j (w_i - w_j)/|w_i - w_j|^(a+2) for each i, shape (N, 2)."""
    w = config.centers
    g = config.circulations
    d = w[:, None, :] - w[None, :, :]
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    np.fill_diagonal(r2, np.inf)
    if r2.min() < _MIN_SEPARATION ** 2:
        raise DivergenceError("pairwise distance below kernel resolution")
    scale = r2 ** (-(config.alpha + 2.0) / 2.0)
    return np.einsum("j,ij,ijk->ik", g, scale, d)


def vortex_velocity(config: PointVortexConfiguration) -> np.ndarray:
    """Induced velocity (C^/2) sum g_j (w_i - w_j)^perp / |.|^(a+2), shape (N, 2)."""
    s = _pairwise_terms(config)
    ch = point_vortex_constant(config.alpha)
    return 0.5 * ch * np.stack([-s[:, 1], s[:, 0]], axis=1)


def equilibrium_residual(config: PointVortexConfiguration) -> np.ndarray:
    """P(lambda) flattened as (P_11, P_12, P_21, P_22, ...), length 2N."""
    s = _pairwise_terms(config)
    ch = point_vortex_constant(config.alpha)
    p = config.omega * config.centers - 0.5 * ch * s
    p[:, 0] += config.speed
    return p.ravel()


def interaction_energy(config: PointVortexConfiguration) -> float:
    """sum_{i<j} g_i g_j |w_i - w_j|^(-a); conserved along orbits."""
    w, g = config.centers, config.circulations
    e = 0.0
    for i in range(config.n_vortices):
        for j in range(i + 1, config.n_vortices):
            r = math.hypot(*(w[i] - w[j]))
            e += g[i] * g[j] * r ** (-config.alpha)
    return e


def circulation_moment(config: PointVortexConfiguration) -> np.ndarray:
    """sum_i g_i w_i; conserved along orbits."""
    return config.circulations @ config.centers


def _rhs(alpha: float, g: np.ndarray, w: np.ndarray) -> np.ndarray:
    d = w[:, None, :] - w[None, :, :]
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    np.fill_diagonal(r2, np.inf)
    scale = r2 ** (-(alpha + 2.0) / 2.0)
    s = np.einsum("j,ij,ijk->ik", g, scale, d)
    ch = point_vortex_constant(alpha)
    return 0.5 * ch * np.stack([-s[:, 1], s[:, 0]], axis=1)


def integrate_orbit(config: PointVortexConfiguration, horizon: float,
                    step: float, collision_factor: float = 1e-8
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Classical fixed-step 4th-order integration of the vortex ODE.

    Returns (times, trajectory) with trajectory shape (n_steps+1, N, 2),
    including the initial state.  Aborts with CollisionError when the
    minimum pairwise distance falls below collision_factor times its
    initial value.
    """
    if step <= 0.0 or horizon < step:
        raise ValueError("require step > 0 and horizon >= step")
    alpha, g = config.alpha, config.circulations
    w = config.centers.copy()
    nsteps = int(round(horizon / step))

    def min_dist(ws):
        if ws.shape[0] == 1:
            return np.inf
        d = ws[:, None, :] - ws[None, :, :]
        r = np.hypot(d[..., 0], d[..., 1])
        np.fill_diagonal(r, np.inf)
        return r.min()

    guard = collision_factor * min_dist(w)
    traj = np.empty((nsteps + 1, config.n_vortices, 2))
    traj[0] = w
    times = step * np.arange(nsteps + 1)
    for k in range(nsteps):
        k1 = _rhs(alpha, g, w)
        k2 = _rhs(alpha, g, w + 0.5 * step * k1)
        k3 = _rhs(alpha, g, w + 0.5 * step * k2)
        k4 = _rhs(alpha, g, w + step * k3)
        w = w + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if min_dist(w) < guard:
            raise CollisionError(f"near-collision at t={times[k + 1]:.6g}")
        traj[k + 1] = w
    return times, traj


# ---------------------------------------------------------------------------
# Jacobians and non-degeneracy
# ---------------------------------------------------------------------------

def equilibrium_jacobian(config: PointVortexConfiguration,
                         free_parameter_indices: list[int],
                         step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of P w.r.t. selected lambda components.

    Shape (2N, len(indices)); step is scaled by max(1, |parameter|).
    """
    lam0 = config.lambda_vector()
    cols = []
    for idx in free_parameter_indices:
        h = step * max(1.0, abs(lam0[idx]))
        lp, lm = lam0.copy(), lam0.copy()
        lp[idx] += h
        lm[idx] -= h
        rp = equilibrium_residual(config.with_lambda(lp))
        rm = equilibrium_residual(config.with_lambda(lm))
        cols.append((rp - rm) / (2.0 * h))
    return np.stack(cols, axis=1)


def analytic_jacobian(kind: FamilyKind, params: dict) -> np.ndarray:
    """Exact D_{lambda1} P matrices of the three canonical families.

    Includes the scalar prefactors.  Row order matches
    equilibrium_residual's flattening; column order matches the family's
    free-parameter split (see ``family_split``).
    """
    kind = FamilyKind(kind)
    alpha = _as_alpha(params["alpha"])
    ch = point_vortex_constant(alpha)
    if kind is FamilyKind.COROTATING_PAIR:
        d, c, g = params["d"], params["c"], params["gamma"]
        pref = g * ch / (2.0 * d ** (alpha + 2.0) * (1.0 + c) ** (alpha + 2.0))
        m = np.array([
            [2.0 + c + alpha, -(alpha + 1.0), 0.0],
            [0.0, 0.0, 1.0],
            [-c * (alpha + 1.0), 1.0 + c * (2.0 + alpha), 0.0],
            [0.0, 0.0, 1.0],
        ])
        return pref * m
    if kind is FamilyKind.TRAVELING_PAIR:
        d, g = params["d"], params["gamma"]
        pref = ch / (2.0 ** (alpha + 3.0) * d ** (alpha + 2.0))
        m = np.array([
            [-g * (alpha + 1.0), 0.0, 0.0],
            [0.0, g, 0.0],
            [-g * (alpha + 1.0), 0.0, 2.0 * d],
            [0.0, g, 0.0],
        ])
        return pref * m
    a, g = params["a"], params["gamma"]
    pref = g * ch / 2.0
    ap1 = (a + 1.0) ** (-alpha - 2.0)
    m = np.array([
        [-(alpha + 1.0) * a ** (alpha + 1.0) * ap1, 0.0, -1.0 / g],
        [0.0, a ** (alpha + 1.0) * ap1, 0.0],
        [-(alpha + 1.0) / a, 0.0, 0.0],
        [0.0, 1.0 / a, 0.0],
        [-(alpha + 1.0) * ap1 / a, 0.0, a ** (-alpha - 1.0) / g],
        [0.0, ap1 / a, 0.0],
    ])
    return pref * m


def family_split(kind: FamilyKind, n_vortices: int) -> list[int]:
    """Free-parameter (lambda_1) indices of the canonical families."""
    kind = FamilyKind(kind)
    n = n_vortices
    if kind is FamilyKind.COROTATING_PAIR:
        return [0, 1, n + 1]                    # w_11, w_21, w_22
    if kind is FamilyKind.TRAVELING_PAIR:
        return [1, n + 1, 2 * n]                # w_21, w_22, g_1
    return [2, n + 2, 2 * n + 1]                # w_31, w_32, g_2


def nondegeneracy_report(config: PointVortexConfiguration,
                         motion_kind: MotionKind | None = None,
                         residual_tol: float = 1e-9,
                         preferred_split: list[int] | None = None,
                         rank_rtol: float = 1e-8) -> NondegeneracyReport:
    """Classify an equilibrium per the codimension-1 / codimension-3 condition.

    Searches the documented family splits first, then every split of the
    right dimension over the lambda components.  Rank is decided by singular
    values with threshold ``rank_rtol * sigma_max``.
    """
    if motion_kind is None:
        motion_kind = config.motion_kind
    motion_kind = MotionKind(motion_kind)
    res = equilibrium_residual(config)
    if np.abs(res).max() > residual_tol:
        raise NondegeneracyError(
            f"configuration is not an equilibrium: |P| = {np.abs(res).max():.3e}")

    n = config.n_vortices
    dim = 2 * n - 1 if motion_kind is not MotionKind.STATIONARY else 2 * n - 3
    want_codim = 1 if motion_kind is not MotionKind.STATIONARY else 3
    if dim < 1:
        raise NondegeneracyError(f"no admissible split of dimension {dim}")

    candidates: list[list[int]] = []
    if preferred_split is not None:
        candidates.append(list(preferred_split))
    # documented family splits first (when dimensions agree), then all splits
    for kind in FamilyKind:
        split = family_split(kind, n)
        if len(split) == dim and max(split) < 3 * n and split not in candidates:
            candidates.append(split)
    pool = list(range(3 * n)) + [3 * n, 3 * n + 1]
    for combo in itertools.combinations(pool, dim):
        if list(combo) not in candidates:
            candidates.append(list(combo))

    best = None
    for split in candidates:
        if len(split) != dim:
            raise ValueError(f"split {split} has wrong dimension (want {dim})")
        jac = equilibrium_jacobian(config, split)
        sv = np.linalg.svd(jac, compute_uv=False)
        rank = int(np.sum(sv > rank_rtol * sv[0])) if sv[0] > 0 else 0
        codim = 2 * n - rank
        passes = (codim == want_codim) and (rank == dim)
        report = NondegeneracyReport(split, jac, rank, codim, passes,
                                     motion_kind, sv)
        if passes:
            return report
        if best is None or rank > best.rank:
            best = report
    return best


# ---------------------------------------------------------------------------
# canonical families
# ---------------------------------------------------------------------------

def corotating_pair(d: float, c: float, gamma: float, alpha) -> PointVortexConfiguration:
    """Asymmetric pair at (d, 0), (-c d, 0) with circulations (c g, g).

    Om* = g C^ / (2 d^(a+2) (1+c)^(a+1)); c = -1 is degenerate and rejected.
    """
    a = _as_alpha(alpha)
    if d <= 0.0:
        raise ValueError("d must be positive")
    if c == -1.0:
        raise ValueError("c = -1 is degenerate (coincident pair)")
    if gamma == 0.0:
        raise ValueError("gamma must be non-zero")
    ch = point_vortex_constant(a)
    omega = gamma * ch / (2.0 * d ** (a + 2.0) * (1.0 + c) ** (a + 1.0))
    centers = np.array([[d, 0.0], [-c * d, 0.0]])
    return PointVortexConfiguration(a, centers, np.array([c * gamma, gamma]),
                                    omega=omega)


def traveling_pair(d: float, gamma: float, alpha) -> PointVortexConfiguration:
    """Counter-signed pair at (+-d, 0); U* = g C^ / (2^(a+2) d^(a+1))."""
    a = _as_alpha(alpha)
    if d <= 0.0:
        raise ValueError("d must be positive")
    if gamma == 0.0:
        raise ValueError("gamma must be non-zero")
    ch = point_vortex_constant(a)
    u = gamma * ch / (2.0 ** (a + 2.0) * d ** (a + 1.0))
    centers = np.array([[d, 0.0], [-d, 0.0]])
    return PointVortexConfiguration(a, centers, np.array([-gamma, gamma]),
                                    speed=u)


def stationary_tripole(a_param: float, gamma: float, alpha) -> PointVortexConfiguration:
    """Stationary tripole at (1, 0), (0, 0), (-a, 0).

    Circulations (g, -g (a/(a+1))^(a+1), g a^(a+1)); Om = U = 0.
    """
    a = _as_alpha(alpha)
    if not (0.0 < a_param < 1.0):
        raise ValueError("a must lie in (0, 1)")
    if gamma == 0.0:
        raise ValueError("gamma must be non-zero")
    centers = np.array([[1.0, 0.0], [0.0, 0.0], [-a_param, 0.0]])
    g2 = -gamma * (a_param / (a_param + 1.0)) ** (a + 1.0)
    g3 = gamma * a_param ** (a + 1.0)
    return PointVortexConfiguration(a, centers, np.array([gamma, g2, g3]))


def family_configuration(kind: FamilyKind, params: dict) -> PointVortexConfiguration:
    kind = FamilyKind(kind)
    if kind is FamilyKind.COROTATING_PAIR:
        return corotating_pair(params["d"], params["c"], params["gamma"], params["alpha"])
    if kind is FamilyKind.TRAVELING_PAIR:
        return traveling_pair(params["d"], params["gamma"], params["alpha"])
    return stationary_tripole(params["a"], params["gamma"], params["alpha"])

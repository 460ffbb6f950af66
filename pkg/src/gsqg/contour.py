"""Patch boundaries and the nonlinear contour functional.

A patch i is the set eps*b_i*O_i + w_i whose boundary is parameterized as

    z_i(x) = w_i + eps b_i R_i(x) (cos x, sin x),
    R_i(x) = 1 + eps|eps|^a b_i^(1+a) f_i(x),

with f_i a truncated Fourier series over modes n >= 2 (modes 0 and 1 are
area/translation and excluded).  The steady-state condition is F_i = 0 with

    F_i = F1_i + F2_i + F3_i

where F1 is the rigid-frame (kinematic) term, F2 the self-interaction
boundary integral (singular, tangential-subtracted numerator) and F3 the
patch-patch interaction (smooth).  All three are normalized so that

    F_i(x) = -(d/dx) Psi(z_i(x)) / (eps b_i R_i(x)),

with Psi the relative stream function; in particular the zeroth Fourier
moment of R_i F_i vanishes identically, and at eps = 0, f = 0 the functional
collapses to the point-vortex residual paired against (-sin x, cos x).

Sign conventions for the kinematic term follow that stream-function
derivation (the counterpart equation in the source derivations carries an
inconsistent relative sign on its O(eps) term): the rotating part is
Om*(w.(R'c + Rc_perp) + eps b R R'), the traveling part pairs the speed with
the first component, U*(R'cos - R sin), and the whole term is divided by R.
These choices are pinned by two exactly-vanishing families of integral
identities (translation/rotation/stationary), tested on random ensembles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import OverlapError, QuadratureError
from .pointvortex import PointVortexConfiguration
from .specialfn import _as_alpha, biot_savart_constant, point_vortex_constant, sigma_coefficient

__all__ = [
    "PatchShape",
    "Patch",
    "PatchEnsemble",
    "ResidualSpectrum",
    "QuadratureSettings",
    "radial_profile",
    "kinematic_term",
    "self_interaction_term",
    "mutual_interaction_term",
    "evaluate_functional",
    "functional_residual",
    "singular_quadrature",
    "curvature",
    "translation_identity",
    "rotation_identity",
    "stationary_identity_vector",
    "stream_function",
    "stream_moment_identities",
    "ensemble_from_configuration",
    "boundary_curve",
]

TWO_PI = 2.0 * math.pi

# Global sign of the spectral multipliers gamma*n*sigma_n relative to the
# (a_n sin - d_n cos) pattern; calibrated by the finite-difference oracle in
# gsqg.linop (see linop.calibrate_sign) and asserted in the tests.
SPECTRAL_SIGN = 1.0


class PatchShape:
    """Truncated Fourier perturbation f(x) = sum_{n=2..M} a_n cos nx + d_n sin nx."""

    def __init__(self, mode_cutoff: int, coefficients: dict | None = None):
        if mode_cutoff < 2:
            raise ValueError("mode cutoff must be at least 2")
        self.mode_cutoff = int(mode_cutoff)
        self.a = np.zeros(self.mode_cutoff + 1)
        self.d = np.zeros(self.mode_cutoff + 1)
        if coefficients:
            for n, (an, dn) in coefficients.items():
                self.set_mode(int(n), an, dn)

    def set_mode(self, n: int, a_n: float, d_n: float):
        if not (2 <= n <= self.mode_cutoff):
            raise ValueError(f"mode {n} outside (2..{self.mode_cutoff})")
        self.a[n] = float(a_n)
        self.d[n] = float(d_n)

    def coefficients(self) -> dict:
        return {n: (self.a[n], self.d[n]) for n in range(2, self.mode_cutoff + 1)
                if self.a[n] != 0.0 or self.d[n] != 0.0}

    def copy(self) -> "PatchShape":
        s = PatchShape(self.mode_cutoff)
        s.a = self.a.copy()
        s.d = self.d.copy()
        return s

    def is_zero(self) -> bool:
        return not (np.any(self.a) or np.any(self.d))

    def evaluate(self, x, derivative: int = 0):
        """f(x), f'(x) or f''(x) by analytic Fourier differentiation."""
        x = np.asarray(x, dtype=float)
        ns = np.arange(2, self.mode_cutoff + 1)
        a, d = self.a[2:], self.d[2:]
        nx = np.multiply.outer(x, ns)
        c, s = np.cos(nx), np.sin(nx)
        if derivative == 0:
            return c @ a + s @ d
        if derivative == 1:
            return s @ (-ns * a) + c @ (ns * d)
        if derivative == 2:
            return c @ (-ns * ns * a) + s @ (-ns * ns * d)
        raise ValueError("derivative order must be 0, 1 or 2")

    def sobolev_norm(self, k: int = 3) -> float:
        """Diagnostic norm (sum (a_n^2 + d_n^2) n^(2k))^(1/2)."""
        ns = np.arange(2, self.mode_cutoff + 1, dtype=float)
        return math.sqrt(float(np.sum((self.a[2:] ** 2 + self.d[2:] ** 2) * ns ** (2 * k))))

    def max_coefficient(self) -> float:
        return float(max(np.abs(self.a).max(), np.abs(self.d).max()))


@dataclass
class Patch:
    shape: PatchShape
    b: float
    center: np.ndarray
    gamma: float

    def __post_init__(self):
        if self.b <= 0.0:
            raise ValueError("scale b must be positive")
        if self.gamma == 0.0:
            raise ValueError("gamma must be non-zero")
        self.center = np.asarray(self.center, dtype=float).reshape(2)


@dataclass
class QuadratureSettings:
    """Graded-panel settings for the singular self-interaction integral."""
    panels_per_side: int = 20
    gauss_nodes: int = 12
    grading_ratio: float = 0.5
    mutual_nodes: int = 256


class PatchEnsemble:
    """N patches with scales, centers, circulations and motion parameters."""

    def __init__(self, alpha, epsilon: float, patches: list[Patch],
                 omega: float = 0.0, speed: float = 0.0):
        self.alpha = _as_alpha(alpha)
        self.epsilon = float(epsilon)
        if not patches:
            raise ValueError("at least one patch required")
        self.patches = list(patches)
        self.omega = float(omega)
        self.speed = float(speed)
        if self.omega != 0.0 and self.speed != 0.0:
            raise ValueError("at most one of omega, speed may be non-zero")
        cutoffs = {p.shape.mode_cutoff for p in patches}
        if len(cutoffs) != 1:
            raise ValueError("all patch shapes must share the mode cutoff")
        self.mode_cutoff = cutoffs.pop()

    @property
    def n_patches(self) -> int:
        return len(self.patches)

    def amplitude(self, i: int) -> float:
        """q_i = eps |eps|^a b_i^(1+a), the shape amplitude in R_i."""
        e = self.epsilon
        return e * abs(e) ** self.alpha * self.patches[i].b ** (1.0 + self.alpha)

    def radial(self, i: int, x, derivative: int = 0):
        q = self.amplitude(i)
        f = self.patches[i].shape.evaluate(x, derivative)
        if derivative == 0:
            return 1.0 + q * f
        return q * f

    def boundary_point(self, i: int, x):
        """z_i(x); x scalar or array, returns (..., 2)."""
        x = np.asarray(x, dtype=float)
        r = self.radial(i, x)
        p = self.patches[i]
        return p.center + self.epsilon * p.b * np.stack(
            [r * np.cos(x), r * np.sin(x)], axis=-1)

    def configuration(self) -> PointVortexConfiguration:
        centers = np.stack([p.center for p in self.patches])
        gammas = np.array([p.gamma for p in self.patches])
        return PointVortexConfiguration(self.alpha, centers, gammas,
                                        omega=self.omega, speed=self.speed)

    def validate(self, samples: int = 256, min_distance: float = 1e-6):
        """Check R > 0 everywhere sampled and pairwise patch disjointness."""
        xs = TWO_PI * np.arange(samples) / samples
        boundaries = []
        for i in range(self.n_patches):
            r = self.radial(i, xs)
            if np.any(r <= 0.0):
                raise ValueError(f"radial profile of patch {i} is not positive")
            boundaries.append(self.boundary_point(i, xs))
        if self.epsilon == 0.0:
            return
        for i in range(self.n_patches):
            for j in range(i + 1, self.n_patches):
                diff = boundaries[i][:, None, :] - boundaries[j][None, :, :]
                dist = np.hypot(diff[..., 0], diff[..., 1]).min()
                if dist <= min_distance:
                    raise OverlapError(
                        f"patches {i} and {j} are closer than {min_distance}")


@dataclass
class ResidualSpectrum:
    """Fourier coefficients of F_i per patch: F ~ mode0 + sum s_n sin + c_n cos."""
    mode0: list[float]
    sin_coeffs: list[np.ndarray]     # per patch, index k -> mode n = k+1
    cos_coeffs: list[np.ndarray]

    @property
    def n_patches(self) -> int:
        return len(self.mode0)

    @property
    def mode_cutoff(self) -> int:
        return len(self.sin_coeffs[0])

    def mode(self, i: int, n: int) -> tuple[float, float]:
        """(sin, cos) coefficients of mode n on patch i."""
        return float(self.sin_coeffs[i][n - 1]), float(self.cos_coeffs[i][n - 1])

    def sup_norm(self, min_mode: int = 1) -> float:
        m = 0.0
        for s, c in zip(self.sin_coeffs, self.cos_coeffs):
            m = max(m, np.abs(s[min_mode - 1:]).max(), np.abs(c[min_mode - 1:]).max())
        return m

    def stacked(self, min_mode: int = 1) -> np.ndarray:
        """Flat vector (per patch: s_min..s_M, c_min..c_M)."""
        parts = []
        for s, c in zip(self.sin_coeffs, self.cos_coeffs):
            parts.extend([s[min_mode - 1:], c[min_mode - 1:]])
        return np.concatenate(parts)


# ---------------------------------------------------------------------------
# quadrature grids
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _graded_offsets(panels: int, nodes: int, ratio: float) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric nodes/weights in t in [-pi, pi], graded toward t = 0.

    Mirror-symmetric by construction: odd integrand parts cancel exactly,
    so the effective integrand behaves like |t|^(2-a) near the singularity.
    """
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    breaks = math.pi * ratio ** np.arange(panels, -1, -1)
    breaks = np.concatenate([[0.0], breaks])
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    t = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    t_all = np.concatenate([-t[::-1], t])
    w_all = np.concatenate([w[::-1], w])
    t_all.setflags(write=False)
    w_all.setflags(write=False)
    return t_all, w_all


def _shape_at_offsets(shape: PatchShape, x: np.ndarray, t: np.ndarray):
    """f(x+t), f'(x+t) as (len(x), len(t)) via the angle-addition split."""
    ns = np.arange(2, shape.mode_cutoff + 1)
    a, d = shape.a[2:], shape.d[2:]
    nx = np.multiply.outer(x, ns)
    cx, sx = np.cos(nx), np.sin(nx)
    nt = np.multiply.outer(ns, t)
    ct, st = np.cos(nt), np.sin(nt)
    p = cx * a + sx * d           # (nx, modes)
    q = cx * d - sx * a
    f = p @ ct + q @ st
    fp = (p * ns) @ (-st) + (q * ns) @ ct
    return f, fp


def _self_integral(ensemble: PatchEnsemble, i: int, x: np.ndarray,
                   quad: QuadratureSettings):
    """Graded-panel value of the F2 boundary integral (without prefactor)."""
    t, w = _graded_offsets(quad.panels_per_side, quad.gauss_nodes,
                           quad.grading_ratio)
    q_i = ensemble.amplitude(i)
    shape = ensemble.patches[i].shape
    fx = shape.evaluate(x)
    fpx = shape.evaluate(x, 1)
    rx, rpx = 1.0 + q_i * fx, q_i * fpx
    fy, fpy = _shape_at_offsets(shape, x, t)
    ry, rpy = 1.0 + q_i * fy, q_i * fpy
    st, ct = np.sin(t), np.cos(t)      # sin(x-y) = -sin t, cos(x-y) = cos t
    num = (rx[:, None] * ry + rpx[:, None] * rpy) * (-st[None, :]) \
        + (rx[:, None] * rpy - rpx[:, None] * ry) * ct[None, :]
    den = (rx[:, None] - ry) ** 2 + 4.0 * rx[:, None] * ry * np.sin(t[None, :] / 2.0) ** 2
    alpha = ensemble.alpha
    return (num * den ** (-alpha / 2.0)) @ w, rx


def radial_profile(shape: PatchShape, epsilon: float, b: float, alpha,
                   x, derivative: int = 0):
    """R(x) = 1 + eps|eps|^a b^(1+a) f(x) (or its x-derivatives)."""
    a = _as_alpha(alpha)
    q = epsilon * abs(epsilon) ** a * b ** (1.0 + a)
    f = shape.evaluate(x, derivative)
    return (1.0 + q * f) if derivative == 0 else q * f


def kinematic_term(ensemble: PatchEnsemble, i: int, x):
    """Rigid-frame term F1_i(x), closed form.

    {Om [w_i.(R'c + Rc_perp) + eps b_i R R'] + U (R'cos x - R sin x)} / R;
    at eps = 0 this is Om w_i.(-sin x, cos x) + U e1.(-sin x, cos x).
    """
    x = np.asarray(x, dtype=float)
    p = ensemble.patches[i]
    r = ensemble.radial(i, x)
    rp = ensemble.radial(i, x, 1)
    cx, sx = np.cos(x), np.sin(x)
    om, u = ensemble.omega, ensemble.speed
    out = u * (rp * cx - r * sx)
    if om != 0.0:
        w1, w2 = p.center
        out = out + om * (w1 * (rp * cx - r * sx) + w2 * (rp * sx + r * cx)
                          + ensemble.epsilon * p.b * r * rp)
    return out / r


def self_interaction_term(ensemble: PatchEnsemble, i: int, x,
                          quad: QuadratureSettings | None = None):
    """Self-interaction F2_i(x).

    For eps != 0: singular boundary integral with the tangentially-subtracted
    numerator, integrable O(|x-y|^(1-a)) at y = x, evaluated on graded panels.
    At eps = 0 the removable 1/(eps|eps|^a) limit is taken analytically: the
    diagonal spectral action gamma_i * n * sigma_n on the shape modes.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    quad = quad or QuadratureSettings()
    p = ensemble.patches[i]
    if ensemble.epsilon == 0.0:
        shape = p.shape
        out = np.zeros_like(x)
        for n in range(2, shape.mode_cutoff + 1):
            an, dn = shape.a[n], shape.d[n]
            if an == 0.0 and dn == 0.0:
                continue
            m = SPECTRAL_SIGN * p.gamma * n * sigma_coefficient(ensemble.alpha, n)
            out += m * (an * np.sin(n * x) - dn * np.cos(n * x))
        return out
    integral, rx = _self_integral(ensemble, i, x, quad)
    ca = biot_savart_constant(ensemble.alpha)
    return ca * p.gamma / (TWO_PI * ensemble.amplitude(i) * rx) * integral


def mutual_interaction_term(ensemble: PatchEnsemble, i: int, x,
                            quad: QuadratureSettings | None = None):
    """Patch-patch term F3_i(x); smooth periodic integrand, trapezoid rule.

    At eps = 0 the removable 1/eps limit is the point-vortex pairing
    (C^/2) sum_j g_j (w_i - w_j).(sin x, -cos x)/|w_i - w_j|^(a+2).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    quad = quad or QuadratureSettings()
    n_pat = ensemble.n_patches
    out = np.zeros_like(x)
    if n_pat == 1:
        return out
    alpha = ensemble.alpha
    p_i = ensemble.patches[i]
    if ensemble.epsilon == 0.0:
        ch = point_vortex_constant(alpha)
        for j in range(n_pat):
            if j == i:
                continue
            p_j = ensemble.patches[j]
            u = p_i.center - p_j.center
            r = math.hypot(*u)
            if r == 0.0:
                raise OverlapError("coincident patch centers")
            out += 0.5 * ch * p_j.gamma * (u[0] * np.sin(x) - u[1] * np.cos(x)) / r ** (alpha + 2.0)
        return out

    eps = ensemble.epsilon
    ca = biot_savart_constant(alpha)
    rx = ensemble.radial(i, x)
    rpx = ensemble.radial(i, x, 1)
    zx = p_i.center[0] + eps * p_i.b * rx * np.cos(x)
    zy = p_i.center[1] + eps * p_i.b * rx * np.sin(x)
    ny = quad.mutual_nodes
    ys = TWO_PI * np.arange(ny) / ny
    for j in range(n_pat):
        if j == i:
            continue
        p_j = ensemble.patches[j]
        ry = ensemble.radial(j, ys)
        rpy = ensemble.radial(j, ys, 1)
        wx = p_j.center[0] + eps * p_j.b * ry * np.cos(ys)
        wy = p_j.center[1] + eps * p_j.b * ry * np.sin(ys)
        dx = zx[:, None] - wx[None, :]
        dy = zy[:, None] - wy[None, :]
        d2 = dx * dx + dy * dy
        if d2.min() <= 0.0:
            raise OverlapError(f"patches {i} and {j} touch")
        sxy = np.sin(x[:, None] - ys[None, :])
        cxy = np.cos(x[:, None] - ys[None, :])
        num = (rx[:, None] * ry[None, :] + rpx[:, None] * rpy[None, :]) * sxy \
            + (rx[:, None] * rpy[None, :] - rpx[:, None] * ry[None, :]) * cxy
        out += (ca * p_j.gamma / (TWO_PI * eps * p_j.b)
                * (num * d2 ** (-alpha / 2.0)).sum(axis=1) * (TWO_PI / ny)) / rx
    return out


def evaluate_functional(ensemble: PatchEnsemble, x,
                        quad: QuadratureSettings | None = None) -> list[np.ndarray]:
    """F_i(x) = F1 + F2 + F3 for every patch on the given angles."""
    quad = quad or QuadratureSettings()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return [kinematic_term(ensemble, i, x)
            + self_interaction_term(ensemble, i, x, quad)
            + mutual_interaction_term(ensemble, i, x, quad)
            for i in range(ensemble.n_patches)]


def _project_spectrum(values: list[np.ndarray], mode_cutoff: int) -> ResidualSpectrum:
    mode0, sins, coss = [], [], []
    for v in values:
        n = len(v)
        coeff = np.fft.rfft(v) / n
        mode0.append(float(coeff[0].real))
        cos_c = 2.0 * coeff[1:mode_cutoff + 1].real
        sin_c = -2.0 * coeff[1:mode_cutoff + 1].imag
        sins.append(sin_c)
        coss.append(cos_c)
    return ResidualSpectrum(mode0, sins, coss)


def functional_residual(ensemble: PatchEnsemble,
                        quad: QuadratureSettings | None = None,
                        grid_factor: int = 4) -> ResidualSpectrum:
    """Evaluate F on a uniform grid of grid_factor*M points, project on modes 1..M.

    The n = 0 coefficient is a diagnostic only: the exact functional
    satisfies integral(F_i R_i dx) = 0, so mode0 is O(residual * shape).
    """
    m = ensemble.mode_cutoff
    nx = max(grid_factor * m, 16)
    xs = TWO_PI * np.arange(nx) / nx
    values = evaluate_functional(ensemble, xs, quad)
    return _project_spectrum(values, m)


# ---------------------------------------------------------------------------
# generic singular quadrature (oracle-facing)
# ---------------------------------------------------------------------------

def singular_quadrature(integrand, alpha, x: float,
                        panels: int = 20, nodes: int = 12,
                        ratio: float = 0.5, tol: float = 1e-8) -> tuple[float, float]:
    """Integrate a 2pi-periodic function with an O(|y-x|^(1-a)) point singularity.

    Returns (value, refinement_estimate); raises QuadratureError when two
    refinement levels disagree by more than tol * max(1, |value|).
    """
    _as_alpha(alpha)

    def level(p, g):
        t, w = _graded_offsets(p, g, ratio)
        return float(np.dot(integrand(x + t), w))

    coarse = level(panels, nodes)
    fine = level(panels + 6, nodes + 4)
    est = abs(fine - coarse)
    if est > tol * max(1.0, abs(fine)):
        raise QuadratureError(
            f"singular quadrature did not converge: estimate {est:.3e}")
    return fine, est


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def curvature(shape: PatchShape, epsilon: float, b: float, alpha, x):
    """Signed curvature of the unit-scale boundary R(x)(cos x, sin x).

    kappa = (R^2 + 2 R'^2 - R R'') / (R^2 + R'^2)^(3/2); equals 1 for f = 0.
    """
    r = radial_profile(shape, epsilon, b, alpha, x)
    rp = radial_profile(shape, epsilon, b, alpha, x, 1)
    rpp = radial_profile(shape, epsilon, b, alpha, x, 2)
    return (r * r + 2.0 * rp * rp - r * rpp) / (r * r + rp * rp) ** 1.5


def boundary_curve(ensemble: PatchEnsemble, i: int, samples: int = 256):
    """(x, R, z1, z2, kappa) rows for CSV export."""
    xs = TWO_PI * np.arange(samples) / samples
    r = ensemble.radial(i, xs)
    z = ensemble.boundary_point(i, xs)
    p = ensemble.patches[i]
    k = curvature(p.shape, ensemble.epsilon, p.b, ensemble.alpha, xs)
    return xs, r, z[:, 0], z[:, 1], k


def min_curvature(ensemble: PatchEnsemble, samples: int = 256) -> float:
    vals = [boundary_curve(ensemble, i, samples)[4].min()
            for i in range(ensemble.n_patches)]
    return float(min(vals))


# ---------------------------------------------------------------------------
# integral identities (each vanishes identically for the exact functional)
# ---------------------------------------------------------------------------

def _identity_grid(ensemble: PatchEnsemble, values, quad, min_nodes: int = 128):
    nx = max(4 * ensemble.mode_cutoff, min_nodes)
    xs = TWO_PI * np.arange(nx) / nx
    if values is None:
        values = evaluate_functional(ensemble, xs, quad)
    else:
        if len(values[0]) != nx:
            raise ValueError("supplied residual values use a different grid")
    return xs, values


def translation_identity(ensemble: PatchEnsemble, residual_values=None,
                         quad: QuadratureSettings | None = None) -> np.ndarray:
    """Translation identity (requires Om = 0); exact zero 2-vector.

    sum_i (g_i/pi) [ integral F_i R_i^2 (cos x, sin x) dx + (U/2) e2 integral R_i^2 dx ].

    The weight R^2 and the speed-area compensation make the identity exact
    for arbitrary shapes and parameters (the raw first-moment form without
    them vanishes only at solutions with zero net circulation).
    """
    if ensemble.omega != 0.0:
        raise ValueError("translation identity requires omega = 0")
    xs, values = _identity_grid(ensemble, residual_values, quad)
    dx = TWO_PI / len(xs)
    out = np.zeros(2)
    for i, p in enumerate(ensemble.patches):
        r = ensemble.radial(i, xs)
        fr2 = values[i] * r * r
        out[0] += p.gamma / math.pi * float(np.sum(fr2 * np.cos(xs))) * dx
        out[1] += p.gamma / math.pi * float(np.sum(fr2 * np.sin(xs))) * dx
        out[1] += p.gamma / math.pi * 0.5 * ensemble.speed * float(np.sum(r * r)) * dx
    return out


def rotation_identity(ensemble: PatchEnsemble, residual_values=None,
                      quad: QuadratureSettings | None = None) -> float:
    """Rotation identity (requires U = 0); exact zero scalar.

    sum_i (g_i/pi) integral F_i R_i^2 [ w_i.(cos x, sin x) + (eps b_i / 2) R_i ] dx.
    """
    if ensemble.speed != 0.0:
        raise ValueError("rotation identity requires speed = 0")
    xs, values = _identity_grid(ensemble, residual_values, quad)
    dx = TWO_PI / len(xs)
    out = 0.0
    for i, p in enumerate(ensemble.patches):
        r = ensemble.radial(i, xs)
        weight = (p.center[0] * np.cos(xs) + p.center[1] * np.sin(xs)
                  + 0.5 * ensemble.epsilon * p.b * r)
        out += p.gamma / math.pi * float(np.sum(values[i] * r * r * weight)) * dx
    return out


def stationary_identity_vector(ensemble: PatchEnsemble, residual_values=None,
                               quad: QuadratureSettings | None = None) -> np.ndarray:
    """Stationary identity vector (requires Om = U = 0); exact zero 3-vector.

    Components: the two translation pairings and the rotation pairing.
    """
    if ensemble.omega != 0.0 or ensemble.speed != 0.0:
        raise ValueError("stationary identities require omega = speed = 0")
    xs, values = _identity_grid(ensemble, residual_values, quad)
    trans = translation_identity(ensemble, values, quad)
    rot = rotation_identity(ensemble, values, quad)
    return np.array([trans[0], trans[1], rot])


def identity_residuals(ensemble: PatchEnsemble, residual_values=None,
                       quad: QuadratureSettings | None = None) -> dict:
    """All identities applicable to the ensemble's motion kind."""
    xs, values = _identity_grid(ensemble, residual_values, quad)
    out = {}
    if ensemble.omega == 0.0 and ensemble.speed == 0.0:
        v = stationary_identity_vector(ensemble, values, quad)
        out["stationary"] = float(np.abs(v).max())
    elif ensemble.omega == 0.0:
        out["translation"] = float(np.abs(translation_identity(ensemble, values, quad)).max())
    else:
        out["rotation"] = abs(rotation_identity(ensemble, values, quad))
    return out


# ---------------------------------------------------------------------------
# stream function
# ---------------------------------------------------------------------------

def _stream_boundary_kernel_constant(alpha: float) -> float:
    # curl_xi of -c (z-xi)^perp/|z-xi|^a equals (2-a) c / |z-xi|^a; matching
    # the area kernel C/(2 pi |.|^a) fixes c = C / (2 pi (2 - a)).
    return biot_savart_constant(alpha) / (TWO_PI * (2.0 - alpha))


def stream_function(ensemble: PatchEnsemble, z, quad: QuadratureSettings | None = None,
                    warn_distance: float = 1e-3):
    """Stream-type potential psi(z) = sum_j Gamma_j int_{D_j} C/(2 pi |z-xi|^a) dA.

    Evaluated as a boundary integral of -c (z-xi)^perp/|z-xi|^a . dxi with
    c = C/(2 pi (2-a)); Gamma_j = g_j/(eps^2 b_j^2).  Points close to a
    boundary trigger a near-singular warning.
    """
    if ensemble.epsilon == 0.0:
        raise ValueError("stream function needs eps != 0 (finite-area patches)")
    quad = quad or QuadratureSettings()
    z = np.asarray(z, dtype=float).reshape(2)
    alpha = ensemble.alpha
    c = _stream_boundary_kernel_constant(alpha)
    ny = max(quad.mutual_nodes, 256)
    ys = TWO_PI * np.arange(ny) / ny
    total = 0.0
    eps = ensemble.epsilon
    for j, p in enumerate(ensemble.patches):
        gamma_w = p.gamma / (eps ** 2 * p.b ** 2)
        bd = ensemble.boundary_point(j, ys)
        r = ensemble.radial(j, ys)
        rp = ensemble.radial(j, ys, 1)
        tangent = eps * p.b * np.stack(
            [rp * np.cos(ys) - r * np.sin(ys), rp * np.sin(ys) + r * np.cos(ys)], axis=1)
        u = z[None, :] - bd
        dist = np.hypot(u[:, 0], u[:, 1])
        if dist.min() < warn_distance:
            warnings.warn(f"stream_function: evaluation point within {dist.min():.2e} "
                          f"of boundary {j}; value is near-singular", stacklevel=2)
        uperp = np.stack([-u[:, 1], u[:, 0]], axis=1)
        integrand = -c * np.sum(uperp * tangent, axis=1) * dist ** (-alpha)
        total += gamma_w * integrand.sum() * (TWO_PI / ny)
    return float(total)


def _stream_on_boundary(ensemble: PatchEnsemble, i: int, xs: np.ndarray,
                        quad: QuadratureSettings) -> np.ndarray:
    """psi evaluated at the boundary points z_i(x); self term via graded panels."""
    alpha = ensemble.alpha
    eps = ensemble.epsilon
    c = _stream_boundary_kernel_constant(alpha)
    z = ensemble.boundary_point(i, xs)
    psi = np.zeros(len(xs))
    for j, p in enumerate(ensemble.patches):
        gamma_w = p.gamma / (eps ** 2 * p.b ** 2)
        if j == i:
            # self term: the difference z_i(x) - z_i(x+t) must be assembled in
            # the center-free trigonometric form, otherwise the O(1) center
            # magnitudes wipe out the O(t^2) numerator near the diagonal
            t, w = _graded_offsets(quad.panels_per_side, quad.gauss_nodes,
                                   quad.grading_ratio)
            q_j = ensemble.amplitude(j)
            fx = p.shape.evaluate(xs)
            fy, fpy = _shape_at_offsets(p.shape, xs, t)
            rx = 1.0 + q_j * fx
            ry, rpy = 1.0 + q_j * fy, q_j * fpy
            dr = q_j * (fy - fx[:, None])
            st = np.sin(t)[None, :]
            s2 = np.sin(t / 2.0)[None, :] ** 2
            # (z(x)-z(y))_perp . z'(y) = (eps b)^2 [Rx R'y sin t - 2 Rx Ry sin^2(t/2) - Ry dR]
            num = rx[:, None] * rpy * st - 2.0 * rx[:, None] * ry * s2 - ry * dr
            d2 = dr * dr + 4.0 * rx[:, None] * ry * s2
            scale = (eps * p.b) ** 2 * abs(eps * p.b) ** (-alpha)
            integrand = -c * scale * num * d2 ** (-alpha / 2.0)
            psi += gamma_w * (integrand @ w)
        else:
            ny = max(quad.mutual_nodes, 256)
            ys = TWO_PI * np.arange(ny) / ny
            bd = ensemble.boundary_point(j, ys)
            r = ensemble.radial(j, ys)
            rp = ensemble.radial(j, ys, 1)
            tx = eps * p.b * (rp * np.cos(ys) - r * np.sin(ys))
            ty = eps * p.b * (rp * np.sin(ys) + r * np.cos(ys))
            ux = z[:, None, 0] - bd[None, :, 0]
            uy = z[:, None, 1] - bd[None, :, 1]
            d2 = ux * ux + uy * uy
            integrand = -c * (-uy * tx[None, :] + ux * ty[None, :]) * d2 ** (-alpha / 2.0)
            psi += gamma_w * integrand.sum(axis=1) * (TWO_PI / ny)
    return psi


def stream_moment_identities(ensemble: PatchEnsemble,
                             quad: QuadratureSettings | None = None,
                             samples: int = 256) -> tuple[float, np.ndarray]:
    """The two stream-moment identities; both vanish for any ensemble.

    Returns (scalar, vector) with
      scalar = sum_i Gamma_i oint psi(z) z . dz      (quadratic moment)
      vector = sum_i Gamma_i oint psi(z) dz          (first moment, 2-vector)
    """
    if ensemble.epsilon == 0.0:
        raise ValueError("stream identities need eps != 0")
    quad = quad or QuadratureSettings()
    xs = TWO_PI * np.arange(samples) / samples
    dx = TWO_PI / samples
    eps = ensemble.epsilon
    vec = np.zeros(2)
    scal = 0.0
    for i, p in enumerate(ensemble.patches):
        gamma_w = p.gamma / (eps ** 2 * p.b ** 2)
        psi = _stream_on_boundary(ensemble, i, xs, quad)
        z = ensemble.boundary_point(i, xs)
        r = ensemble.radial(i, xs)
        rp = ensemble.radial(i, xs, 1)
        tangent = eps * p.b * np.stack(
            [rp * np.cos(xs) - r * np.sin(xs), rp * np.sin(xs) + r * np.cos(xs)], axis=1)
        vec += gamma_w * (psi[:, None] * tangent).sum(axis=0) * dx
        scal += gamma_w * float(np.sum(psi * np.sum(z * tangent, axis=1))) * dx
    return scal, vec


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------

def ensemble_from_configuration(config: PointVortexConfiguration, epsilon: float,
                                mode_cutoff: int, b_scales=None,
                                shapes: list[PatchShape] | None = None) -> PatchEnsemble:
    """Trivial (or given-shape) ensemble sitting on a point-vortex configuration."""
    n = config.n_vortices
    if b_scales is None:
        b_scales = np.ones(n)
    b_scales = np.asarray(b_scales, dtype=float)
    if shapes is None:
        shapes = [PatchShape(mode_cutoff) for _ in range(n)]
    patches = [Patch(shapes[i], b_scales[i], config.centers[i], config.circulations[i])
               for i in range(n)]
    return PatchEnsemble(config.alpha, epsilon, patches,
                         omega=config.omega, speed=config.speed)

"""Linearization of the contour functional at the trivial state.

At (eps, f) = (0, 0) the derivative of F_i in the shape f_i acts diagonally
on Fourier modes,

    h = a_n cos(nx) + d_n sin(nx)  |->  s * g_i * n * sigma_n * (a_n sin(nx) - d_n cos(nx)),

with zero cross-patch blocks.  The global sign s is measured once per
configuration by a finite-difference probe (calibrate_sign) rather than
taken from conflicting printed statements; the measured value is +1.

The module also hosts the two finite-difference oracles that anchor the
asymptotics: gateaux_fd (directional derivative in the shape) and
eps_derivative_oracle (derivative in the patch-size parameter at the trivial
state).  The eps-oracle defines the first-order shape of the continuation
predictor; for configurations with all centers on an axis the measured
response sits in the mode-2 sine of F and hence in the mode-2 *cosine* of
the shape (the diagonal action swaps sin and cos).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import contour
from .contour import (PatchEnsemble, PatchShape, QuadratureSettings,
                      ResidualSpectrum, ensemble_from_configuration,
                      functional_residual)
from .errors import RangeViolationError
from .pointvortex import PointVortexConfiguration, equilibrium_residual
from .specialfn import biot_savart_constant, sigma_coefficient

__all__ = [
    "SpectralMultiplier",
    "spectral_multipliers",
    "apply_linearization",
    "solve_linearization",
    "gateaux_fd",
    "calibrate_sign",
    "eps_derivative_oracle",
    "eps_derivative_closed_form",
    "first_order_shape",
    "first_order_report",
]


@dataclass
class SpectralMultiplier:
    """Per-patch diagonal multipliers m_{i,n} = s g_i n sigma_n, n >= 2."""
    alpha: float
    gammas: np.ndarray
    mode_cutoff: int
    sign: float = 1.0

    def multiplier(self, i: int, n: int) -> float:
        return self.sign * self.gammas[i] * n * sigma_coefficient(self.alpha, n)

    def table(self) -> np.ndarray:
        """(n_patches, M-1) array of m_{i,n} for n = 2..M."""
        ns = np.arange(2, self.mode_cutoff + 1)
        sig = np.array([sigma_coefficient(self.alpha, int(n)) for n in ns])
        return self.sign * np.outer(self.gammas, ns * sig)


def spectral_multipliers(config: PointVortexConfiguration, mode_cutoff: int,
                         sign: float = contour.SPECTRAL_SIGN) -> SpectralMultiplier:
    return SpectralMultiplier(config.alpha, config.circulations.copy(),
                              mode_cutoff, sign)


def apply_linearization(config: PointVortexConfiguration,
                        shapes: list[PatchShape],
                        sign: float = contour.SPECTRAL_SIGN) -> ResidualSpectrum:
    """Image of the diagonal mode action on each patch shape.

    Cross-patch blocks vanish identically, so patch i's image depends on
    h_i alone.
    """
    if len(shapes) != config.n_vortices:
        raise ValueError("one shape per vortex required")
    cutoffs = {s.mode_cutoff for s in shapes}
    if len(cutoffs) != 1:
        raise ValueError("shapes must share the mode cutoff")
    m = cutoffs.pop()
    mode0, sins, coss = [], [], []
    for i, shape in enumerate(shapes):
        sin_c = np.zeros(m)
        cos_c = np.zeros(m)
        for n in range(2, m + 1):
            mult = sign * config.circulations[i] * n * sigma_coefficient(config.alpha, n)
            sin_c[n - 1] = mult * shape.a[n]
            cos_c[n - 1] = -mult * shape.d[n]
        mode0.append(0.0)
        sins.append(sin_c)
        coss.append(cos_c)
    return ResidualSpectrum(mode0, sins, coss)


def solve_linearization(config: PointVortexConfiguration,
                        spectrum: ResidualSpectrum,
                        sign: float = contour.SPECTRAL_SIGN,
                        mode1_tol: float = 1e-10) -> list[PatchShape]:
    """Invert the diagonal action on modes n >= 2.

    Mode-1 content above mode1_tol (relative to the spectrum scale) is a
    range violation: the diagonal operator maps onto modes n >= 2 only.
    """
    if spectrum.n_patches != config.n_vortices:
        raise ValueError("one spectrum row per vortex required")
    m = spectrum.mode_cutoff
    scale = max(spectrum.sup_norm(), 1e-300)
    shapes = []
    for i in range(spectrum.n_patches):
        s1, c1 = spectrum.mode(i, 1)
        if max(abs(s1), abs(c1)) > mode1_tol * max(1.0, scale):
            raise RangeViolationError(
                f"mode-1 content {max(abs(s1), abs(c1)):.3e} outside the solvable range")
        shape = PatchShape(m)
        for n in range(2, m + 1):
            mult = sign * config.circulations[i] * n * sigma_coefficient(config.alpha, n)
            s_n, c_n = spectrum.mode(i, n)
            # image of (a cos + d sin) is mult * (a sin - d cos)
            shape.set_mode(n, s_n / mult, -c_n / mult)
        shapes.append(shape)
    return shapes


def gateaux_fd(config: PointVortexConfiguration, epsilon: float,
               shapes: list[PatchShape], direction: list[PatchShape],
               delta: float = 1e-4, b_scales=None,
               quad: QuadratureSettings | None = None,
               richardson: bool = True) -> ResidualSpectrum:
    """Central-difference Gateaux derivative of F at (eps, shapes, lambda).

    (F(f + delta h) - F(f - delta h)) / (2 delta), Richardson extrapolated
    with the half step by default.  Purely a verification oracle.
    """
    def spectrum_at(step: float) -> ResidualSpectrum:
        pert = []
        for s, h in zip(shapes, direction):
            p = s.copy()
            p.a = p.a + step * h.a
            p.d = p.d + step * h.d
            pert.append(p)
        ens = ensemble_from_configuration(config, epsilon, shapes[0].mode_cutoff,
                                          b_scales, pert)
        return functional_residual(ens, quad)

    def diff(step: float) -> ResidualSpectrum:
        sp = spectrum_at(step)
        sm = spectrum_at(-step)
        n = config.n_vortices
        return ResidualSpectrum(
            [(sp.mode0[i] - sm.mode0[i]) / (2.0 * step) for i in range(n)],
            [(sp.sin_coeffs[i] - sm.sin_coeffs[i]) / (2.0 * step) for i in range(n)],
            [(sp.cos_coeffs[i] - sm.cos_coeffs[i]) / (2.0 * step) for i in range(n)])

    d1 = diff(delta)
    if not richardson:
        return d1
    d2 = diff(delta / 2.0)
    n = config.n_vortices
    return ResidualSpectrum(
        [(4.0 * d2.mode0[i] - d1.mode0[i]) / 3.0 for i in range(n)],
        [(4.0 * d2.sin_coeffs[i] - d1.sin_coeffs[i]) / 3.0 for i in range(n)],
        [(4.0 * d2.cos_coeffs[i] - d1.cos_coeffs[i]) / 3.0 for i in range(n)])


def calibrate_sign(config: PointVortexConfiguration, mode_cutoff: int = 8,
                   b_scales=None, quad: QuadratureSettings | None = None,
                   probe_epsilon: float = 1e-4) -> float:
    """Measure the global sign s of the diagonal action on h = cos(2x).

    Probes at a small non-zero eps (the eps = 0 evaluation path itself uses
    the calibrated sign, so it cannot calibrate itself).  Returns +-1.0.
    """
    zero = [PatchShape(mode_cutoff) for _ in range(config.n_vortices)]
    direction = [PatchShape(mode_cutoff) for _ in range(config.n_vortices)]
    direction[0].set_mode(2, 1.0, 0.0)
    spectrum = gateaux_fd(config, probe_epsilon, zero, direction,
                          delta=1e-4, b_scales=b_scales, quad=quad)
    s2, _ = spectrum.mode(0, 2)
    ref = config.circulations[0] * 2.0 * sigma_coefficient(config.alpha, 2)
    return math.copysign(1.0, s2 * ref)


def eps_derivative_oracle(config: PointVortexConfiguration, mode_cutoff: int = 8,
                          b_scales=None, delta: float = 1e-3,
                          quad: QuadratureSettings | None = None) -> dict:
    """d/d(eps) of the residual spectrum at (0, 0, lambda), Richardson extrapolated.

    Returns per-patch mode-2 coefficients and the leakage into every other
    mode; at an equilibrium with centers on the first axis the response is a
    pure mode-2 sine.
    """
    def spectrum_at(eps: float) -> ResidualSpectrum:
        ens = ensemble_from_configuration(config, eps, mode_cutoff, b_scales)
        return functional_residual(ens, quad)

    def diff(step: float):
        sp, sm = spectrum_at(step), spectrum_at(-step)
        return [((sp.sin_coeffs[i] - sm.sin_coeffs[i]) / (2.0 * step),
                 (sp.cos_coeffs[i] - sm.cos_coeffs[i]) / (2.0 * step))
                for i in range(config.n_vortices)]

    d1 = diff(delta)
    d2 = diff(delta / 2.0)
    per_patch = []
    for (s1, c1), (s2, c2) in zip(d1, d2):
        ds = (4.0 * s2 - s1) / 3.0
        dc = (4.0 * c2 - c1) / 3.0
        other = np.concatenate([np.delete(ds, 1), np.delete(dc, 1)])
        per_patch.append({
            "sin2": float(ds[1]),
            "cos2": float(dc[1]),
            "leakage": float(np.abs(other).max()),
            "sin": ds,
            "cos": dc,
        })
    return {"per_patch": per_patch, "delta": delta}


def eps_derivative_closed_form(config: PointVortexConfiguration,
                               b_scales=None) -> list[tuple[float, float]]:
    """Closed-form (sin2, cos2) coefficients of d(F_i)/d(eps) at (0, 0, lambda).

    Expanding the patch-patch integral to first order in eps gives

      dF_i/deps = (a(a+2) C / 4) sum_{j != i} g_j b_i
                  [ -Re(u^2) sin 2x + Im(u^2) cos 2x ] / |u|^(a+4),

    with u = w_i - w_j and u^2 its complex square.  The printed counterpart
    keeps "(w_j - w_i)^2 sin x cos x" with coefficient a(a+2)C; the measured
    response is -1/2 of that and lives in the swapped parity (both facts are
    asserted against eps_derivative_oracle in the tests).
    """
    n = config.n_vortices
    if b_scales is None:
        b_scales = np.ones(n)
    a = config.alpha
    k = a * (a + 2.0) * biot_savart_constant(a) / 4.0
    out = []
    for i in range(n):
        s2 = c2 = 0.0
        for j in range(n):
            if j == i:
                continue
            u = config.centers[i] - config.centers[j]
            r = math.hypot(*u)
            re2 = u[0] * u[0] - u[1] * u[1]
            im2 = 2.0 * u[0] * u[1]
            g = config.circulations[j] * b_scales[i] / r ** (a + 4.0)
            s2 += -k * g * re2
            c2 += k * g * im2
        out.append((s2, c2))
    return out


def first_order_shape(config: PointVortexConfiguration, i: int, epsilon: float,
                      mode_cutoff: int = 8, b_scales=None,
                      oracle: dict | None = None,
                      residual_tol: float = 1e-8,
                      quad: QuadratureSettings | None = None) -> PatchShape:
    """Leading-order shape of patch i: eps * (df_i/deps at 0).

    Solves the diagonal linearization against the measured eps-derivative of
    the residual, per the chain D_f F . (df/deps) = -(dF/deps), restricted to
    modes n >= 2 (the mode-1 response vanishes at an equilibrium and any FD
    noise there is dropped).  Requires lambda to be an equilibrium.
    """
    res = np.abs(equilibrium_residual(config)).max()
    if res > residual_tol:
        raise ValueError(f"first_order_shape requires an equilibrium, |P| = {res:.3e}")
    if oracle is None:
        oracle = eps_derivative_oracle(config, mode_cutoff, b_scales, quad=quad)
    data = oracle["per_patch"][i]
    m = len(data["sin"])
    shape = PatchShape(m)
    for n in range(2, m + 1):
        mult = contour.SPECTRAL_SIGN * config.circulations[i] * n * sigma_coefficient(config.alpha, n)
        shape.set_mode(n, -data["sin"][n - 1] / mult, data["cos"][n - 1] / mult)
    shape.a *= epsilon
    shape.d *= epsilon
    return shape


def first_order_report(config: PointVortexConfiguration, mode_cutoff: int = 8,
                       b_scales=None) -> dict:
    """Measured vs closed-form eps-derivative, plus the scalar-reading table.

    For each patch: the measured (sin2, cos2) of dF/deps, the closed-form
    prediction, and for two-patch rows the candidate readings of the printed
    "(w_j - w_i)^2" scalar (squared distance vs component product vs complex
    square).  On-axis rows make the squared distance the effective scalar.
    """
    oracle = eps_derivative_oracle(config, mode_cutoff, b_scales)
    closed = eps_derivative_closed_form(config, b_scales)
    rows = []
    for i, data in enumerate(oracle["per_patch"]):
        row = {
            "patch": i,
            "measured_sin2": data["sin2"],
            "measured_cos2": data["cos2"],
            "closed_form_sin2": closed[i][0],
            "closed_form_cos2": closed[i][1],
            "leakage": data["leakage"],
        }
        if config.n_vortices == 2:
            j = 1 - i
            u = config.centers[i] - config.centers[j]
            row["scalar_norm_square"] = float(u[0] ** 2 + u[1] ** 2)
            row["scalar_component_product"] = float(u[0] * u[1])
            row["scalar_complex_square"] = (float(u[0] ** 2 - u[1] ** 2),
                                            float(2.0 * u[0] * u[1]))
        rows.append(row)
    return {"rows": rows}

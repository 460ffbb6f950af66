"""Batch front door: constants | pointvortex | vstate | validate.

Every subcommand reads a JSON config (--config), writes deterministic
artifacts under --out (default '.'), and exits with a class-specific code:

    0  success
    1  validate: at least one check failed
    2  configuration error (schema, preconditions, overlap)
    3  non-degeneracy failure
    4  corrector failure
    5  identity violation

Config schemas (unknown keys are rejected):

constants:   {"alpha_grid": [...], "n_max": 32, "oracle_tol": 1e-8}
pointvortex: {"family": "corotating_pair"|"traveling_pair"|"stationary_tripole",
              "params": {"alpha": ..., "d"/"c"/"a"/"gamma": ...},
              "orbit": {"horizon": ..., "step": ...}}           # optional
vstate:      {"family": ..., "params": {...},
              "epsilon_schedule": [0, ...], "mode_cutoff": 16,
              "corrector_tol": 1e-9, "b_scales": [...],         # optional
              "boundary_samples": 256}                          # optional
validate:    {"checks": [...], "alpha_samples": 50, "quick": false,
              "fault_injection": {"sigma_scale": 1.0}}          # all optional

The environment variable GSQG_NUM_THREADS caps the BLAS thread pools
(the library itself evaluates sequentially).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, serialize, validate as validate_mod
from .errors import (ConvergenceError, GsqgError, NondegeneracyError,
                     OverlapError)
from .pointvortex import (FamilyKind, analytic_jacobian, equilibrium_jacobian,
                          equilibrium_residual, family_configuration,
                          family_split, integrate_orbit, nondegeneracy_report)
from .solver import (ContinuationSettings, IdentityViolationError,
                     branch_report, desingularize)
from .specialfn import (beta_coefficient, biot_savart_constant,
                        kernel_quadrature_oracle, point_vortex_constant,
                        sigma_coefficient)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NONDEGENERACY = 3
EXIT_CORRECTOR = 4
EXIT_IDENTITY = 5

_SCHEMAS = {
    "constants": {"alpha_grid", "n_max", "oracle_tol"},
    "pointvortex": {"family", "params", "orbit"},
    "vstate": {"family", "params", "epsilon_schedule", "mode_cutoff",
               "corrector_tol", "max_corrector_iters", "fd_jacobian_step",
               "b_scales", "boundary_samples", "identity_tolerance"},
    "validate": {"checks", "alpha_samples", "quick", "fault_injection"},
}

_FAMILY_PARAMS = {
    FamilyKind.COROTATING_PAIR: {"alpha", "d", "c", "gamma"},
    FamilyKind.TRAVELING_PAIR: {"alpha", "d", "gamma"},
    FamilyKind.STATIONARY_TRIPOLE: {"alpha", "a", "gamma"},
}


class ConfigError(GsqgError):
    pass


def _limit_threads():
    cap = os.environ.get("GSQG_NUM_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def _load_config(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(cfg) - _SCHEMAS[command]
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    return cfg


def _family_config(cfg: dict):
    try:
        family = FamilyKind(cfg["family"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid or missing family: {exc}") from exc
    params = cfg.get("params")
    if not isinstance(params, dict):
        raise ConfigError("params object required")
    want = _FAMILY_PARAMS[family]
    if set(params) != want:
        raise ConfigError(f"family {family.value} needs params {sorted(want)}")
    try:
        config = family_configuration(family, params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return family, params, config


def _header(command: str, cfg: dict, seed: int) -> list[str]:
    return [f"gsqg {command} v{__version__}",
            f"config_sha256={serialize.config_hash(cfg)}",
            f"seed={seed}"]


def _write(out_dir: Path, name: str, text: str, quiet: bool):
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if not quiet:
        print(f"wrote {path}")


def cmd_constants(cfg: dict, out: Path, seed: int, quiet: bool) -> int:
    alphas = cfg.get("alpha_grid", list(validate_mod.DEFAULT_ALPHA_GRID))
    n_max = int(cfg.get("n_max", 32))
    tol = float(cfg.get("oracle_tol", 1e-8))
    rows = []
    for a in alphas:
        c = biot_savart_constant(a)
        chat = point_vortex_constant(a)
        for n in range(1, n_max + 1):
            x = np.pi / (2 * n)
            beta = beta_coefficient(a, n)
            try:
                quad = kernel_quadrature_oracle(a, n, "I", x, tol=tol) / np.sin(n * x)
                rel = abs(quad - beta) / abs(beta)
                flag = ""
            except GsqgError as exc:
                quad, rel, flag = float("nan"), float("nan"), f"oracle:{exc}"
            rows.append([a, n, c, chat, sigma_coefficient(a, n), beta, quad,
                         rel if not flag else flag])
    text = serialize.csv_lines(
        _header("constants", cfg, seed),
        ["alpha", "n", "C_alpha", "C_hat_alpha", "sigma_n", "beta_n",
         "beta_n_quadrature", "rel_err"], rows)
    _write(out, "constants.csv", text, quiet)
    return EXIT_OK


def cmd_pointvortex(cfg: dict, out: Path, seed: int, quiet: bool) -> int:
    family, params, config = _family_config(cfg)
    residual = equilibrium_residual(config)
    split = family_split(family, config.n_vortices)
    rep = nondegeneracy_report(config, preferred_split=split)
    fd = equilibrium_jacobian(config, split)
    exact = analytic_jacobian(family, params)
    report = {
        "meta": {"command": "pointvortex", "version": __version__,
                 "config_sha256": serialize.config_hash(cfg), "seed": seed},
        "family": family.value,
        "params": params,
        "omega": config.omega,
        "speed": config.speed,
        "centers": config.centers,
        "circulations": config.circulations,
        "residual": residual,
        "residual_norm": float(np.abs(residual).max()),
        "nondegeneracy": {
            "free_parameter_indices": rep.free_parameter_indices,
            "free_parameter_labels": [config.lambda_labels()[k]
                                      for k in rep.free_parameter_indices],
            "rank": rep.rank, "codim": rep.codim, "passes": rep.passes,
            "singular_values": rep.singular_values,
        },
        "jacobian_fd": fd,
        "jacobian_analytic": exact,
        "jacobian_max_rel_err": float(np.max(
            np.abs(fd - exact) / np.maximum(np.abs(exact), 1e-12))),
    }
    _write(out, "pointvortex.json", serialize.dumps(report), quiet)
    orbit = cfg.get("orbit")
    if orbit:
        times, traj = integrate_orbit(config, float(orbit["horizon"]),
                                      float(orbit["step"]))
        rows = []
        stride = max(1, len(times) // 2000)
        for k in range(0, len(times), stride):
            for i in range(config.n_vortices):
                rows.append([times[k], i, traj[k, i, 0], traj[k, i, 1]])
        text = serialize.csv_lines(_header("pointvortex", cfg, seed),
                                   ["t", "vortex", "w1", "w2"], rows)
        _write(out, "orbit.csv", text, quiet)
    return EXIT_OK if rep.passes else EXIT_NONDEGENERACY


def cmd_vstate(cfg: dict, out: Path, seed: int, quiet: bool) -> int:
    family, params, config = _family_config(cfg)
    try:
        settings = ContinuationSettings(
            mode_cutoff=int(cfg.get("mode_cutoff", 32)),
            eps_schedule=tuple(cfg.get("epsilon_schedule", (0.0, 0.005, 0.01, 0.015, 0.02))),
            corrector_tol=float(cfg.get("corrector_tol", 1e-9)),
            max_corrector_iters=int(cfg.get("max_corrector_iters", 25)),
            fd_jacobian_step=float(cfg.get("fd_jacobian_step", 1e-6)),
            b_scales=tuple(cfg["b_scales"]) if "b_scales" in cfg else None,
            identity_tolerance=float(cfg.get("identity_tolerance", 1e-7)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    branch = desingularize(config, settings, family=family)
    report = branch_report(branch)
    meta = {"command": "vstate", "version": __version__,
            "config_sha256": serialize.config_hash(cfg), "seed": seed,
            "family": family.value, "params": params}
    data = serialize.branch_to_dict(branch, report)
    data["meta"] = meta
    _write(out, "branch.json", serialize.dumps(data), quiet)
    samples = int(cfg.get("boundary_samples", 256))
    for entry in branch.entries:
        tag = repr(float(entry.epsilon)).replace(".", "p").replace("-", "m")
        text = serialize.boundary_csv(entry.ensemble,
                                      _header("vstate", cfg, seed), samples)
        _write(out, f"boundary_eps_{tag}.csv", text, quiet)
    if not quiet:
        for row in report["entries"]:
            print(f"eps={row['epsilon']:<8g} residual={row['residual_norm']:.3e} "
                  f"min_curvature={row['min_curvature']:.6f} "
                  f"iters={row['corrector_iters']}")
    return EXIT_OK


def cmd_validate(cfg: dict, out: Path, seed: int, quiet: bool) -> int:
    fault = cfg.get("fault_injection", {}) or {}
    unknown = set(fault) - {"sigma_scale"}
    if unknown:
        raise ConfigError(f"unknown fault_injection keys: {sorted(unknown)}")
    result = validate_mod.run_suite(
        which=cfg.get("checks"), seed=seed,
        sigma_scale=float(fault.get("sigma_scale", 1.0)),
        quick=bool(cfg.get("quick", False)))
    result["meta"] = {"command": "validate", "version": __version__,
                      "config_sha256": serialize.config_hash(cfg), "seed": seed}
    _write(out, "validate.json", serialize.dumps(result), quiet)
    if not quiet:
        for chk in result["checks"]:
            status = "PASS" if chk["passed"] else "FAIL"
            print(f"[{status}] {chk['name']}: measured={chk['measured']} "
                  f"threshold={chk['threshold']}")
    if not result["passed"]:
        first = next(c["name"] for c in result["checks"] if not c["passed"])
        if not quiet:
            print(f"first failing check: {first}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsqg",
        description="Desingularized vortex-patch equilibria: constants, "
                    "point-vortex reports, continuation runs, validation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("constants", "kernel constants and spectral coefficients table"),
            ("pointvortex", "canonical family report (residual, Jacobians, rank)"),
            ("vstate", "continuation run: branch JSON plus boundary CSVs"),
            ("validate", "run the verification suite")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=(name != "validate"),
                       help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    _limit_threads()
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "validate" and args.config is None:
            cfg = {}
        else:
            cfg = _load_config(args.config, args.command)
        handler = {"constants": cmd_constants, "pointvortex": cmd_pointvortex,
                   "vstate": cmd_vstate, "validate": cmd_validate}[args.command]
        return handler(cfg, out, args.seed, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OverlapError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NondegeneracyError as exc:
        print(f"nondegeneracy failure: {exc}", file=sys.stderr)
        return EXIT_NONDEGENERACY
    except IdentityViolationError as exc:
        print(f"identity violation: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    except ConvergenceError as exc:
        print(f"corrector failure: {exc}", file=sys.stderr)
        return EXIT_CORRECTOR


if __name__ == "__main__":
    sys.exit(main())

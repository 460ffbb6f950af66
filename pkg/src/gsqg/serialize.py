"""JSON schemas for ensembles and branches, CSV writers, stable formatting.

Ensemble schema (version 1):

    {
      "schema_version": 1,
      "alpha": 1.5,
      "epsilon": 0.01,
      "omega": 0.123,          # exactly one of omega/speed non-zero, or both 0
      "speed": 0.0,
      "mode_cutoff": 16,
      "patches": [
        {"b": 1.0, "center": [1.0, 0.0], "gamma": 0.5,
         "coefficients": {"2": [a_2, d_2], "3": [a_3, d_3], ...}},
        ...
      ]
    }

All files are UTF-8 with LF line endings, '.' decimal separator, and floats
printed with repr (shortest round-trip), so repeated runs with the same
config are byte-identical.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .contour import Patch, PatchEnsemble, PatchShape, boundary_curve

SCHEMA_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def dumps(data: dict) -> str:
    return json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n"


def config_hash(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(_jsonable(config), sort_keys=True).encode()).hexdigest()[:16]


def shape_to_dict(shape: PatchShape) -> dict:
    return {str(n): [a, d] for n, (a, d) in sorted(shape.coefficients().items())}


def shape_from_dict(data: dict, mode_cutoff: int) -> PatchShape:
    shape = PatchShape(mode_cutoff)
    for n, (a, d) in data.items():
        shape.set_mode(int(n), float(a), float(d))
    return shape


def ensemble_to_dict(ensemble: PatchEnsemble) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "alpha": ensemble.alpha,
        "epsilon": ensemble.epsilon,
        "omega": ensemble.omega,
        "speed": ensemble.speed,
        "mode_cutoff": ensemble.mode_cutoff,
        "patches": [
            {"b": p.b, "center": list(p.center), "gamma": p.gamma,
             "coefficients": shape_to_dict(p.shape)}
            for p in ensemble.patches
        ],
    }


def ensemble_from_dict(data: dict) -> PatchEnsemble:
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported ensemble schema {data.get('schema_version')}")
    m = int(data["mode_cutoff"])
    patches = [Patch(shape_from_dict(p.get("coefficients", {}), m),
                     float(p["b"]), np.asarray(p["center"], dtype=float),
                     float(p["gamma"]))
               for p in data["patches"]]
    return PatchEnsemble(float(data["alpha"]), float(data["epsilon"]), patches,
                         omega=float(data.get("omega", 0.0)),
                         speed=float(data.get("speed", 0.0)))


def branch_to_dict(branch, report: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "lambda1_indices": list(branch.lambda1_indices),
        "entries": [
            {
                "epsilon": e.epsilon,
                "lambda1": list(e.lambda1),
                "residual_norm": e.residual_norm,
                "identity_residuals": e.identity_residuals,
                "min_curvature": e.min_curvature,
                "corrector_iters": e.corrector_iters,
                "mode0_diagnostic": e.mode0_diagnostic,
                "ensemble": ensemble_to_dict(e.ensemble),
            }
            for e in branch.entries
        ],
        "report": report,
    }


def csv_lines(header_comments: list[str], columns: list[str],
              rows: list[list]) -> str:
    """CSV body with '#'-prefixed header block, repr floats, LF endings."""
    lines = [f"# {c}" for c in header_comments]
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(repr(float(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def boundary_csv(ensemble: PatchEnsemble, header_comments: list[str],
                 samples: int = 256) -> str:
    rows = []
    for i in range(ensemble.n_patches):
        xs, r, z1, z2, kappa = boundary_curve(ensemble, i, samples)
        for k in range(len(xs)):
            rows.append([i, xs[k], r[k], z1[k], z2[k], kappa[k]])
    return csv_lines(header_comments,
                     ["patch_index", "x", "R", "z1", "z2", "kappa"], rows)

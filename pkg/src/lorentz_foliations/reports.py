"""Report envelopes, deterministic JSON and CSV emission."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from .schema import SCHEMA_VERSION

CONVENTIONS = {
    "curvature": "R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z; R_ABCD = g(R(e_A,e_B)e_C, e_D)",
    "ricci": "Ric(X,Y) = sum_A eps_A g(R(e_A,X)Y, e_A)",
    "ric_direction": "ric(N) = -(1/n) Ric(N,N)  (normalized; an unnormalized variant is also in use elsewhere)",
    "second_fundamental_form": "h_ij = -g(nabla_{e_j} N, e_i)",
    "mean_curvature": "H = -(1/n) tr h, so that Div N = n H",
    "normal": "N = future-pointing unit normal of the level sets of tau",
    "riccati": "principal curvature k = -(eigenvalue of h) obeys dk/ds = -(k^2 + kappa), kappa = g(R(v,N)N,v)",
}


def to_jsonable(obj):
    """Recursively convert numpy values; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def envelope(command: str, config: dict, result: dict, status: str, exit_code: int, error: str | None = None) -> dict:
    doc = {
        "schema": "lorfol." + command.replace("-", "_"),
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "conventions": CONVENTIONS,
        "result": result,
        "status": status,
        "exit_code": exit_code,
    }
    if error is not None:
        doc["error"] = error
    return to_jsonable(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(doc: dict, path: str | None) -> None:
    text = dumps(doc)
    if path in (None, "", "-"):
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def write_csv(path: str, header: list, rows) -> None:
    """Plain CSV with a header row; floats in repr form (locale independent), missing or non-finite values empty."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)

    def cell(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v)) if math.isfinite(v) else ""
        return "" if v is None else v

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell(v) for v in row])


def strip_timestamp(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "timestamp"}

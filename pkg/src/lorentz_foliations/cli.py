"""Command line front end: ``lorfol <command> [options]``.

Commands::

    lorfol zoo [FILTER]                         list witness spacetimes
    lorfol audit --spacetime minkowski          calibrate signs, audit a foliation
    lorfol riccati --kappa 1 --h0 0             closed form vs numerical Riccati flow
    lorfol gf --spacetime de_sitter_flat_slicing --c 1
    lorfol umbilicity --spacetime slab --leaves 0.5,2.0
    lorfol integrate-leaf --spacetime static_lapse_torus --levels 0

Options come from ``--config FILE`` (JSON or YAML), overridden by flags.
Unrecognised ``--name value`` pairs become spacetime parameters.  Exit
codes: 0 pass, 1 usage or configuration error, 2 a check failed.
"""

from __future__ import annotations

import argparse
import copy
import os
import sys

import numpy as np
import yaml
from threadpoolctl import threadpool_limits

from . import reports
from .errors import FoliationError, InvalidParams, NoUniqueSignature
from .gf_bounds import check_bounds, gf_integrand
from .identity_audit import SignSignature, calibrate_signature, fundamental_terms, split_residual
from .leaf_integrals import l1_norm_leaf, obstruction_report
from .riccati_flow import RiccatiParams, riccati_closed_form, riccati_integrate_batch, umbilicity_scan
from .sampling import Sampler
from .zoo import ZOO, SpacetimeSpec, resolve_name, zoo_build, zoo_list

THREADS_ENV = "LORFOL_NUM_THREADS"

DEFAULT_WITNESSES = [
    {"name": "robertson_walker", "params": {}},
    {"name": "minkowski_tilted", "params": {"eps": 0.5}},
    {"name": "static_lapse_torus", "params": {}},
    {"name": "de_sitter_flat_slicing", "params": {"c": 1.0}},
]

DEFAULTS = {
    "spacetime": {"name": "minkowski", "params": {}},
    "sampler": {"method": "sobol", "count": 256, "seed": 0},
    "tolerances": {"identity": 1e-6, "split": 1e-6, "riccati": 1e-8, "geodesic": 1e-10},
    "output": {"path": None, "format": "json", "csv": None},
    "audit": {"witnesses": DEFAULT_WITNESSES},
    "riccati": {"kappa": 1.0, "h0": 0.0, "s_max": None, "samples": 201},
    "umbilicity": {"leaves": [0.5, 2.0], "nodes": 16},
    "leaf": {"levels": [0.0], "nodes": 64},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping")
    return data


def _scalar(text: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise UsageError(f"cannot parse value {text!r}") from exc


def _floats(text: str) -> list:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _extra_params(extra: list) -> dict:
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) <= 2:
            raise UsageError(f"unrecognized argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        elif i + 1 < len(extra):
            val = extra[i + 1]
            i += 2
        else:
            raise UsageError(f"missing value for {tok}")
        out[key] = _scalar(val)
    return out


def resolve_config(args, extra: list) -> dict:
    cfg = _merge(DEFAULTS, load_config(args.config))
    over: dict = {}
    if args.spacetime is not None:
        over.setdefault("spacetime", {})["name"] = args.spacetime
    params = {}
    for kv in args.param or []:
        if "=" not in kv:
            raise UsageError(f"--param expects KEY=VALUE, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k] = _scalar(v)
    params.update(_extra_params(extra))
    if params:
        over.setdefault("spacetime", {})["params"] = params
    for key, attr in (("method", "sampler"), ("count", "samples"), ("seed", "seed")):
        if getattr(args, attr) is not None:
            over.setdefault("sampler", {})[key] = getattr(args, attr)
    if args.output is not None:
        over.setdefault("output", {})["path"] = args.output
    if args.csv is not None:
        over.setdefault("output", {})["csv"] = args.csv
    if args.format is not None:
        over.setdefault("output", {})["format"] = args.format
    if args.tol is not None:
        over["tolerances"] = {k: args.tol for k in ("identity", "split", "riccati")}
    cmd = args.command
    if cmd == "riccati":
        for key in ("kappa", "h0", "s_max"):
            if getattr(args, key) is not None:
                over.setdefault("riccati", {})[key] = getattr(args, key)
    if cmd == "umbilicity":
        if args.leaves is not None:
            over.setdefault("umbilicity", {})["leaves"] = _floats(args.leaves)
        if args.nodes is not None:
            over.setdefault("umbilicity", {})["nodes"] = args.nodes
    if cmd == "integrate-leaf":
        if args.levels is not None:
            over.setdefault("leaf", {})["levels"] = _floats(args.levels)
        if args.nodes is not None:
            over.setdefault("leaf", {})["nodes"] = args.nodes
    if cmd == "audit" and args.witnesses is not None:
        over.setdefault("audit", {})["witnesses"] = [{"name": w, "params": {}} for w in args.witnesses.split(",") if w]
    cfg = _merge(cfg, over)
    # record the full parameter set actually used
    name = resolve_name(str(cfg["spacetime"]["name"]))
    cfg["spacetime"]["name"] = name
    cfg["spacetime"]["params"] = _merge(ZOO[name].defaults, cfg["spacetime"].get("params") or {})
    return cfg


def _build(spec: dict):
    return zoo_build(SpacetimeSpec(spec["name"], dict(spec.get("params") or {})))


def _sampler(cfg) -> Sampler:
    s = cfg["sampler"]
    return Sampler(str(s["method"]), int(s["count"]), int(s["seed"]))


# ---------------------------------------------------------------------------
# commands; each returns (result dict, passed, csv table or None)


def run_audit(cfg):
    tol = float(cfg["tolerances"]["identity"])
    sampler = _sampler(cfg)
    witnesses = []
    for w in cfg["audit"]["witnesses"]:
        _, fol = _build(w)
        witnesses.append((fol, sampler.points(*fol.sample_box)))
    try:
        calib = calibrate_signature(witnesses, tol).to_dict()
    except NoUniqueSignature as exc:
        calib = exc.report.to_dict()
    _, fol = _build(cfg["spacetime"])
    pts = sampler.points(*fol.sample_box)
    terms = fundamental_terms(fol, pts)
    residuals = {s.label: float(np.max(np.abs(terms.residual(s)))) for s in SignSignature.all()}
    split = float(np.max(np.abs(split_residual(fol, pts))))
    winner = calib["winner"]
    winner_res = residuals[winner] if winner else None
    passed = winner is not None and winner_res < tol and split < float(cfg["tolerances"]["split"])
    result = {
        "calibration": calib,
        "target": {
            "spacetime": fol.name,
            "points": int(pts.shape[0]),
            "residuals": residuals,
            "split_residual": split,
            "winner_residual": winner_res,
        },
        "passed": passed,
    }
    table = (["signature", "max_abs_residual"], sorted(residuals.items()))
    return result, passed, table


def run_riccati(cfg):
    rc = cfg["riccati"]
    params = RiccatiParams(float(rc["kappa"]), float(rc["h0"]))
    sol = riccati_closed_form(params)
    s_max = rc.get("s_max")
    if s_max is None:
        s_max = 10.0 if sol.blow_up is None else min(10.0, 1.25 * sol.blow_up)
    s_max = float(s_max)
    s = np.linspace(0.0, s_max, int(rc["samples"]))
    num = riccati_integrate_batch(params.kappa, params.h0, s)
    exact = sol.evaluate(s)
    keep = np.ones_like(s, dtype=bool) if sol.blow_up is None else s < sol.blow_up - 1e-3
    dev = float(np.max(np.abs(num.h[keep] - exact[keep]))) if np.any(keep) else 0.0
    blow_num = None if np.isnan(num.blow_up) else float(num.blow_up)
    blow_ok = (sol.blow_up is None or sol.blow_up > s_max) == (blow_num is None)
    if sol.blow_up is not None and blow_num is not None:
        blow_ok = abs(blow_num - sol.blow_up) < 1e-6
    tol = float(cfg["tolerances"]["riccati"])
    result = {
        "kappa": params.kappa,
        "h0": params.h0,
        "branch": sol.branch,
        "blow_up": sol.blow_up,
        "blow_up_numeric": blow_num,
        "max_deviation": dev,
        "s_max": s_max,
    }
    rows = [(float(a), float(b), float(c)) for a, b, c in zip(s, num.h, exact)]
    return result, bool(dev < tol and blow_ok), (["s", "h_numeric", "h_closed_form"], rows)


def run_gf(cfg):
    _, fol = _build(cfg["spacetime"])
    sampler = _sampler(cfg)
    rep = check_bounds(fol, sampler, strict=False)
    est = rep.estimate
    result = {
        "spacetime": fol.name,
        "gf": rep.gf,
        "supH2": rep.sup_H2,
        "supB2": rep.sup_B2,
        "margin": rep.margin,
        "clauses": rep.clauses,
        "argmin": est.argmin,
        "sample_count": est.sample_count,
        "box": est.box,
        "integrand": {"min": est.integrand_min, "max": est.integrand_max, "mean": est.integrand_mean},
        "witnesses": rep.witnesses,
    }
    pts = sampler.points(*fol.sample_box)
    vals = gf_integrand(fol, pts)
    header = [f"x{i}" for i in range(fol.dim)] + ["integrand"]
    rows = [tuple(float(v) for v in p) + (float(f),) for p, f in zip(pts, vals)]
    return result, rep.passed, (header, rows)


def run_umbilicity(cfg):
    _, fol = _build(cfg["spacetime"])
    uc = cfg["umbilicity"]
    tol = float(cfg["tolerances"]["geodesic"])
    scans = umbilicity_scan(fol, [float(v) for v in uc["leaves"]], int(uc["nodes"]))
    leaves = []
    for sc in scans:
        d = sc.to_dict()
        d["totally_geodesic"] = sc.max_h_norm < tol
        d["umbilical"] = sc.max_umb_dev < tol
        leaves.append(d)
    header = ["level", "max_umb_dev", "max_h_norm", "min_H", "max_H"]
    rows = [tuple(d[k] for k in header) for d in leaves]
    return {"spacetime": fol.name, "leaves": leaves}, True, (header, rows)


def run_integrate_leaf(cfg):
    _, fol = _build(cfg["spacetime"])
    lc = cfg["leaf"]
    nodes = int(lc["nodes"])
    rep = obstruction_report(fol, [float(v) for v in lc["levels"]], nodes)
    d = rep.to_dict()
    for leaf in d["leaves"]:
        leaf["l1_norm"] = l1_norm_leaf(fol, leaf["level"], nodes)
    header = ["level", "max_B", "stokes", "curvature", "ric_term", "accel_term", "normal_H_term", "B_term", "l1_norm", "obstructed"]
    rows = [tuple(leaf[k] for k in header) for leaf in d["leaves"]]
    return d, True, (header, rows)


RUNNERS = {
    "audit": run_audit,
    "riccati": run_riccati,
    "gf": run_gf,
    "umbilicity": run_umbilicity,
    "integrate-leaf": run_integrate_leaf,
}


def cmd_zoo(args) -> int:
    entries = zoo_list(args.filter)
    w = max([len(e.name) for e in entries] + [4])
    print(f"{'name':<{w}}  {'foliation':<34}  domain")
    for e in entries:
        print(f"{e.name:<{w}}  {e.foliation:<34}  {e.domain}")
    print(f"({len(entries)} {'entry' if len(entries) == 1 else 'entries'})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lorfol", description="Audits of spacelike foliations on Lorentzian charts.", allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    z = sub.add_parser("zoo", help="list witness spacetimes")
    z.add_argument("filter", nargs="?", default=None)
    for name, help_ in (
        ("audit", "sign calibration and identity audit"),
        ("riccati", "Riccati flow: closed form vs numerics"),
        ("gf", "foliation invariant and mean-curvature bounds"),
        ("umbilicity", "per-leaf umbilicity scan"),
        ("integrate-leaf", "compact-leaf integrals and obstruction pattern"),
    ):
        # no prefix matching: unknown --name value pairs are spacetime parameters
        s = sub.add_parser(name, help=help_, allow_abbrev=False)
        s.add_argument("--config", help="JSON or YAML run configuration")
        s.add_argument("--spacetime", help="zoo entry name")
        s.add_argument("--param", action="append", metavar="KEY=VALUE", help="spacetime parameter (repeatable)")
        s.add_argument("--sampler", choices=["uniform", "sobol", "grid"])
        s.add_argument("--samples", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--tol", type=float, help="override all check tolerances")
        s.add_argument("--output", help="JSON report path (default: stdout)")
        s.add_argument("--csv", help="also write a CSV table here")
        s.add_argument("--format", choices=["json", "csv"])
        s.add_argument("--threads", type=int, help=f"cap BLAS threads (default: ${THREADS_ENV})")
        if name == "riccati":
            s.add_argument("--kappa", type=float)
            s.add_argument("--h0", type=float)
            s.add_argument("--s-max", dest="s_max", type=float)
        if name == "audit":
            s.add_argument("--witnesses", help="comma-separated zoo names for calibration")
        if name == "umbilicity":
            s.add_argument("--leaves", help="comma-separated leaf values")
            s.add_argument("--nodes", type=int)
        if name == "integrate-leaf":
            s.add_argument("--levels", help="comma-separated leaf values")
            s.add_argument("--nodes", type=int)
    return p


def _threads(args) -> int | None:
    val = args.threads if args.threads is not None else os.environ.get(THREADS_ENV)
    if val in (None, ""):
        return None
    try:
        n = int(val)
    except ValueError as exc:
        raise UsageError(f"bad thread count {val!r}") from exc
    if n < 1:
        raise UsageError("thread count must be positive")
    return n


def run(args, extra) -> int:
    cfg = resolve_config(args, extra)
    command = args.command
    out = cfg["output"]
    try:
        with threadpool_limits(limits=_threads(args)):
            result, passed, table = RUNNERS[command](cfg)
    except InvalidParams:
        raise
    except FoliationError as exc:
        doc = reports.envelope(command, cfg, {}, "error", 2, f"{type(exc).__name__}: {exc}")
        reports.write_json(doc, out["path"])
        return 2
    code = 0 if passed else 2
    doc = reports.envelope(command, cfg, result, "pass" if passed else "fail", code)
    csv_path = out.get("csv")
    if out.get("format") == "csv":
        if not out.get("path"):
            raise UsageError("--format csv needs --output")
        csv_path = out["path"]
        reports.write_json(doc, None)
    else:
        reports.write_json(doc, out.get("path"))
    if csv_path and table is not None:
        reports.write_csv(csv_path, *table)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.command == "zoo":
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        return cmd_zoo(args)
    try:
        return run(args, extra)
    except (UsageError, InvalidParams, TypeError, ValueError) as exc:
        print(f"lorfol: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

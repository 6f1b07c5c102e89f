"""JSON schemas (draft 2020-12) of the reports written by the command line tool.

Field names are stable within a schema version; additions bump the minor
version, removals or renames the major one.
"""

SCHEMA_VERSION = "1.0"

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_point = {"type": "array", "items": _num}

CONVENTIONS = {
    "type": "object",
    "required": ["curvature", "ricci", "ric_direction", "second_fundamental_form", "mean_curvature", "normal"],
    "additionalProperties": {"type": "string"},
}

ENVELOPE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "schema_version", "command", "timestamp", "config", "conventions", "result", "status", "exit_code"],
    "properties": {
        "schema": {"type": "string", "pattern": "^lorfol\\.[a-z_]+$"},
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["audit", "riccati", "gf", "umbilicity", "integrate-leaf"]},
        "timestamp": {"type": "string"},
        "config": {"type": "object"},
        "conventions": CONVENTIONS,
        "result": {"type": "object"},
        "status": {"enum": ["pass", "fail", "error"]},
        "exit_code": {"enum": [0, 2]},
        "error": {"type": "string"},
    },
}

_signature_table = {"type": "object", "additionalProperties": {"type": "object", "additionalProperties": _num}}

RESULTS = {
    "audit": {
        "type": "object",
        "required": ["calibration", "target", "passed"],
        "properties": {
            "calibration": {
                "type": "object",
                "required": ["residuals", "winner", "passing", "reference_signature", "reference_residuals", "tolerance"],
                "properties": {
                    "residuals": _signature_table,
                    "winner": {"type": ["string", "null"]},
                    "passing": {"type": "array", "items": {"type": "string"}},
                    "reference_signature": {"type": "string"},
                    "reference_residuals": {"type": "object", "additionalProperties": _num},
                    "tolerance": _num,
                },
            },
            "target": {
                "type": "object",
                "required": ["spacetime", "points", "residuals", "split_residual", "winner_residual"],
                "properties": {
                    "spacetime": {"type": "string"},
                    "points": {"type": "integer"},
                    "residuals": {"type": "object", "additionalProperties": _num},
                    "split_residual": _num,
                    "winner_residual": _num_or_null,
                },
            },
            "passed": {"type": "boolean"},
        },
    },
    "riccati": {
        "type": "object",
        "required": ["kappa", "h0", "branch", "blow_up", "blow_up_numeric", "max_deviation", "s_max"],
        "properties": {
            "kappa": _num,
            "h0": _num,
            "branch": {"enum": ["tan", "rational", "tanh_interior", "coth_exterior", "equilibrium"]},
            "blow_up": _num_or_null,
            "blow_up_numeric": _num_or_null,
            "max_deviation": _num,
            "s_max": _num,
        },
    },
    "gf": {
        "type": "object",
        "required": ["spacetime", "gf", "supH2", "supB2", "margin", "clauses", "argmin", "sample_count", "box"],
        "properties": {
            "spacetime": {"type": "string"},
            "gf": _num,
            "supH2": _num,
            "supB2": _num,
            "margin": _num,
            "clauses": {"type": "object", "additionalProperties": {"type": "boolean"}},
            "argmin": _point,
            "sample_count": {"type": "integer"},
            "box": {"type": "object"},
        },
    },
    "umbilicity": {
        "type": "object",
        "required": ["spacetime", "leaves"],
        "properties": {
            "spacetime": {"type": "string"},
            "leaves": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["level", "max_umb_dev", "max_h_norm", "totally_geodesic", "umbilical"],
                    "properties": {
                        "level": _num,
                        "max_umb_dev": _num,
                        "max_h_norm": _num,
                        "totally_geodesic": {"type": "boolean"},
                        "umbilical": {"type": "boolean"},
                    },
                },
            },
        },
    },
    "integrate-leaf": {
        "type": "object",
        "required": ["spacetime", "nodes", "leaves", "any_obstructed"],
        "properties": {
            "spacetime": {"type": "string"},
            "nodes": {"type": "integer"},
            "any_obstructed": {"type": "boolean"},
            "leaves": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["level", "max_B", "stokes", "curvature", "ric_term", "accel_term", "l1_norm", "obstructed"],
                },
            },
        },
    },
}


def schema_for(command: str) -> dict:
    """Envelope schema with the command's result schema plugged in (error envelopes carry an empty result)."""
    out = dict(ENVELOPE)
    out["if"] = {"properties": {"status": {"const": "error"}}}
    out["then"] = {"required": ["error"], "properties": {"result": {"type": "object", "maxProperties": 0}}}
    out["else"] = {"properties": {"result": RESULTS[command]}}
    return out

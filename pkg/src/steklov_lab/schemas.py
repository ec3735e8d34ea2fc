"""JSON schemas for CLI configs and reports."""

from __future__ import annotations

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}
_interval = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_arcs = {"type": "array", "items": _interval}
_point = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

CURVE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["circle", "polygon", "star", "sector"]},
        "params": {
            "type": "object",
            "properties": {
                "radius": _pos,
                "center": _point,
                "vertices": {"type": "array", "items": _point, "minItems": 3},
                "cos": {"type": "array", "items": _num, "minItems": 1},
                "sin": {"type": "array", "items": _num},
                "angle": _pos,
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def _config(required, props):
    return {
        "type": "object",
        "required": ["curve"] + list(required),
        "properties": {"curve": CURVE, "seed": {"type": "integer"}, **props},
        "additionalProperties": False,
    }


CONFIG_SCHEMAS = {
    "solve": _config(["arcs", "h_target", "k"], {
        "arcs": _arcs, "h_target": _pos, "k": _posint,
        "refinements": {"type": "integer", "minimum": 0}, "endpoint_h": _pos,
    }),
    "stability": _config(["arcs", "k", "eps"], {
        "arcs": _arcs, "k": _posint, "eps": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2},
        "mode": {"enum": ["endpoint-shift", "arc-translate"]}, "h_target": _pos,
        "endpoint": {"type": "integer", "minimum": 0}, "calibration": _posint, "signal_factor": _pos,
    }),
    "diverge": _config([], {
        "n_grid": {"type": "array", "items": _posint, "minItems": 1}, "m": _pos, "k": _posint,
        "h_levels": {"type": "array", "items": _pos}, "elements_per_arc": _pos, "h_max": _pos,
        "endpoint_ratio": {"type": ["number", "null"], "exclusiveMinimum": 0}, "max_deviation": _pos,
    }),
    "singularity": _config(["arcs", "interface_point"], {
        "arcs": _arcs, "interface_point": _num, "radii_window": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
        "h_target": _pos, "k": _posint, "n_samples": {"type": "integer", "minimum": 2},
    }),
    "continuity": _config(["target", "k"], {
        "target": _arcs, "k": _posint, "h_target": _pos, "envelope_constant": _pos,
        "directions": {"type": "array", "items": _point},
        "eps": {"type": "array", "items": _pos, "minItems": 1},
        "sequence": {"type": "array", "items": _arcs, "minItems": 1},
    }),
    "converge": _config(["arcs", "k"], {
        "arcs": _arcs, "k": _posint, "levels": {"type": "integer", "minimum": 3}, "h_target": _pos,
    }),
    "optimize": _config(["objective", "m", "N"], {
        "objective": {"enum": ["minimize", "maximize"]}, "k": _posint, "m": _pos, "N": _posint,
        "h_target": _pos, "endpoint_h": _pos, "budget": _posint, "tol": _pos, "restarts": _posint,
        "optimize_phase": {"type": "boolean"}, "phase": _num, "init_scale": _pos,
        "tie_rtol": {"type": "number", "minimum": 0}, "mesh_mode": {"enum": ["deform", "remesh"]},
        "workers": _posint,
    }),
}

_prov = {"type": "object", "required": ["settings_hash"], "properties": {"settings_hash": {"type": "string"}}}
_nums = {"type": "array", "items": _num}
_table = {"type": "array", "items": {"type": "array", "items": _num}}


def _report(required, props):
    return {"type": "object", "required": ["provenance"] + list(required),
            "properties": {"provenance": _prov, **props}}


REPORT_SCHEMAS = {
    "solve": _report(["lambda", "residuals", "h", "k", "clusters", "mesh"], {
        "lambda": _nums, "residuals": _nums, "h": _pos, "k": _posint,
        "clusters": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "mesh": {"type": "object", "required": ["n_vertices", "min_angle_deg"]},
    }),
    "stability": _report(["eps", "symdiff", "hausdorff_euclidean", "hausdorff_arclength", "delta_lambda",
                          "noise_floor", "slope", "slope_residual", "constant"], {
        "eps": _nums, "symdiff": _nums, "delta_lambda": _table, "noise_floor": _nums,
        "slope": {"type": ["number", "null"]}, "slope_residual": {"type": ["number", "null"]},
        "constant": {"type": ["number", "null"]},
    }),
    "diverge": _report(["n", "lambda_coarse", "lambda_fine", "ratio", "deviation", "converged",
                        "strictly_increasing"], {
        "n": {"type": "array", "items": {"type": "integer"}}, "lambda_coarse": _nums, "lambda_fine": _nums,
        "ratio": _nums, "deviation": _nums, "converged": {"type": "array", "items": {"type": "boolean"}},
        "strictly_increasing": {"type": "boolean"},
    }),
    "singularity": _report(["radii", "values", "exponent"], {"radii": _nums, "values": _nums, "exponent": _num}),
    "continuity": _report(["hausdorff", "symdiff", "eigenvalues", "gaps", "monotone", "envelope"], {
        "hausdorff": _nums, "symdiff": _nums, "eigenvalues": _table, "gaps": _nums,
        "monotone": {"type": "boolean"}, "envelope": _nums,
    }),
    "converge": _report(["h", "eigenvalues", "orders", "extrapolated", "monotone"], {
        "h": _nums, "eigenvalues": _table,
        "extrapolated": {"type": "array", "items": {"type": ["number", "null"]}},
    }),
    "optimize": _report(["best", "best_value", "log", "incumbent", "termination"], {
        "best_value": _num, "incumbent": _nums, "termination": {"type": "string"},
        "log": {"type": "array", "items": {"type": "object", "required": ["restart", "iteration", "arcs", "lambda"]}},
    }),
}

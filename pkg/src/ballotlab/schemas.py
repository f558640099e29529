"""JSON schemas for every machine-readable record the tool emits, and a
validator used both by the CLI before writing and by the round-trip tests."""

from __future__ import annotations

import jsonschema

_NUMBER = {"type": "number"}
_NULLABLE_NUMBER = {"type": ["number", "null"]}
_FLAGS = {"type": "array", "items": {"type": "string"}}

PROB_RESULT_SCHEMA = {
    "type": "object",
    "required": ["ballotlab_schema", "value", "mode"],
    "properties": {
        "ballotlab_schema": {"const": 1},
        "value": _NUMBER,
        "mode": {"enum": ["exact-rational", "exact-float", "monte-carlo"]},
        "stderr": _NUMBER,
        "trials": {"type": "integer"},
        "hits": {"type": "integer"},
        "seed": {"type": ["integer", "null"]},
        "exact": {"type": "string", "pattern": r"^-?\d+/\d+$"},
        "flags": _FLAGS,
        "query": {"type": "object"},
    },
}

_CELL_SCHEMA = {
    "type": "object",
    "required": ["n", "param", "raw_prob", "normalized_ratio", "method"],
    "properties": {
        "n": {"type": "integer"},
        "param": _NUMBER,
        "param_exact": {"type": "string"},
        "requested": _NUMBER,
        "raw_prob": _NUMBER,
        "normalized_ratio": _NUMBER,
        "method": {"enum": ["exact", "mc"]},
        "stderr": _NUMBER,
        "flags": _FLAGS,
    },
}

SCAN_REPORT_SCHEMA = {
    "type": "object",
    "required": ["ballotlab_schema", "kind", "scan", "grid", "ratio_min",
                 "ratio_max", "fitted_lower_c", "fitted_upper_C",
                 "threshold", "pass"],
    "properties": {
        "ballotlab_schema": {"const": 1},
        "kind": {"const": "scan_report"},
        "scan": {"enum": ["ballot", "stopping", "spread", "second_moment"]},
        "dist": {"type": "string"},
        "config": {"type": "object"},
        "grid": {"type": "array", "items": _CELL_SCHEMA, "minItems": 1},
        "ratio_min": _NUMBER,
        "ratio_max": _NUMBER,
        "fitted_lower_c": _NUMBER,
        "fitted_upper_C": _NUMBER,
        "threshold": _NUMBER,
        "pass": {"type": "boolean"},
    },
}

_RENDERED_PROB = {
    "type": "object",
    "required": ["value", "mode"],
    "properties": {
        "value": _NULLABLE_NUMBER,
        "mode": {"type": "string"},
        "stderr": _NUMBER,
        "exact": {"type": "string"},
        "flags": _FLAGS,
    },
}

COUNTEREXAMPLE_SCHEMA = {
    "type": "object",
    "required": ["ballotlab_schema", "kind", "family", "K", "n", "k",
                 "endpoint_window_prob", "joint_prob",
                 "conditional_ballot_prob", "bertrand_value", "label",
                 "asymptotics"],
    "properties": {
        "ballotlab_schema": {"const": 1},
        "kind": {"const": "counterexample_report"},
        "family": {"enum": ["tower", "heavy"]},
        "K": {"type": "integer"},
        "n": {"type": "integer"},
        "A": {"type": "string"},
        "k": {"type": "string"},
        "k_requested": {"type": "string"},
        "endpoint_window_prob": _RENDERED_PROB,
        "joint_prob": _RENDERED_PROB,
        "conditional_ballot_prob": _RENDERED_PROB,
        "bertrand_value": _NUMBER,
        "bertrand_exact": {"type": "string"},
        "ratio_to_bertrand": _NULLABLE_NUMBER,
        "exact_dp_used": {"type": "boolean"},
        "label": {"type": "string"},
        "asymptotics": {"type": "string"},
        "level_summary": {"type": "object"},
        "mc_crosscheck": {"type": "object"},
    },
}

CHERNOFF_SCHEMA = {
    "type": "object",
    "required": ["ballotlab_schema", "kind", "m", "q", "v", "t",
                 "upper_emp", "upper_bound", "lower_emp", "lower_bound"],
    "properties": {
        "ballotlab_schema": {"const": 1},
        "kind": {"const": "chernoff_rand_check"},
        "m": {"type": "integer"},
        "q": _NUMBER, "v": _NUMBER, "t": _NUMBER,
        "trials": {"type": "integer"},
        "seed": {"type": "integer"},
        "upper_emp": _NUMBER, "upper_stderr": _NUMBER, "upper_bound": _NUMBER,
        "lower_emp": _NUMBER, "lower_stderr": _NUMBER, "lower_bound": _NUMBER,
    },
}

LEVEL_SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["ballotlab_schema", "kind", "levels"],
    "properties": {
        "ballotlab_schema": {"const": 1},
        "kind": {"const": "level_summary"},
        "trials": {"type": "integer"},
        "seed": {"type": "integer"},
        "levels": {"type": "array", "items": {"type": "object"}},
    },
}

DIST_LITERAL_SCHEMA = {
    "type": "object",
    "required": ["atoms"],
    "properties": {
        "label": {"type": "string"},
        "atoms": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "array", "minItems": 4, "maxItems": 4,
                      "items": {"type": "integer"}},
        },
        "levels": {"type": "array", "items": {"type": "object"}},
    },
}

_BY_KIND = {
    "scan_report": SCAN_REPORT_SCHEMA,
    "counterexample_report": COUNTEREXAMPLE_SCHEMA,
    "chernoff_rand_check": CHERNOFF_SCHEMA,
    "level_summary": LEVEL_SUMMARY_SCHEMA,
}


def validate_report(obj: dict) -> None:
    """Validate an emitted record against its schema; raises
    jsonschema.ValidationError on mismatch."""
    if not isinstance(obj, dict):
        raise jsonschema.ValidationError("record must be a JSON object")
    kind = obj.get("kind")
    schema = _BY_KIND.get(kind, PROB_RESULT_SCHEMA if "value" in obj
                          else DIST_LITERAL_SCHEMA)
    jsonschema.validate(obj, schema)

"""JSON schemas for file inputs and a loader that reports JSON pointers."""

from __future__ import annotations

import json
from importlib import resources

import jsonschema

from qg3.errors import QG3Error, ValidationError
from qg3.metric import Schedule
from qg3.tensor_basis import MAX_LABEL_SITES, BasisLabel, CoefficientVector

TERM_SCHEMA = {
    "type": "object",
    "required": ["sites", "gm", "h"],
    "properties": {
        "sites": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "gm": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1, "maximum": 8}},
        "h": {"type": "number"},
    },
    "additionalProperties": False,
}

SCHEDULE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["n", "segments"],
    "properties": {
        "version": {"const": "qg3-v1"},
        "n": {"type": "integer", "minimum": 1, "maximum": MAX_LABEL_SITES},
        "segments": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["dt", "terms"],
                "properties": {
                    "dt": {"type": "number", "exclusiveMinimum": 0},
                    "terms": {"type": "array", "items": TERM_SCHEMA},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

COEFFICIENT_SCHEMA = {
    "type": "object",
    "required": ["n", "terms"],
    "properties": {
        "n": {"type": "integer", "minimum": 1, "maximum": MAX_LABEL_SITES},
        "terms": {"type": "array", "items": TERM_SCHEMA},
    },
}


class SchemaError(ValidationError):
    """Schema violation located by a JSON pointer (RFC 6901)."""

    def __init__(self, message, pointer):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def json_pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate(obj, schema):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, json_pointer(err.absolute_path))


def load_schedule(obj) -> Schedule:
    """Validate a decoded schedule document and build the :class:`Schedule`."""
    validate(obj, SCHEDULE_SCHEMA)
    n = obj["n"]
    segs = []
    for i, seg in enumerate(obj["segments"]):
        terms = {}
        for j, t in enumerate(seg["terms"]):
            try:
                lab = BasisLabel(n, tuple(t["sites"]), tuple(t["gm"]))
            except QG3Error as exc:
                raise SchemaError(str(exc), f"/segments/{i}/terms/{j}") from exc
            terms[lab] = terms.get(lab, 0.0) + float(t["h"])
        segs.append((seg["dt"], CoefficientVector(n, terms)))
    return Schedule(n, tuple(segs))


def read_schedule(path) -> Schedule:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON ({exc.msg} at line {exc.lineno})", "") from exc
    return load_schedule(obj)


def example_schedule_path():
    """Path of the shipped two-qutrit, unit-length example schedule."""
    return resources.files("qg3") / "data" / "example_n2.json"

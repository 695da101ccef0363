"""JSON form of :class:`MetricSpec` (load, validate, dump)."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import ExprError, SpecError
from .geometry import MetricSpec

_EXPR = {"type": "string", "minLength": 1}
_FORM = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["i", "j", "k", "expr"],
        "properties": {
            "i": {"type": "integer", "minimum": 0},
            "j": {"type": "integer", "minimum": 0},
            "k": {"type": "integer", "minimum": 0},
            "expr": _EXPR,
        },
        "additionalProperties": False,
    },
}

SPEC_SCHEMA = {
    "type": "object",
    "required": ["name", "dim", "coords", "metric", "domain"],
    "properties": {
        "name": {"type": "string"},
        "dim": {"type": "integer", "minimum": 1},
        "coords": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "params": {"type": "object", "additionalProperties": {"type": "number"}},
        "metric": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["i", "j", "expr"],
                "properties": {
                    "i": {"type": "integer", "minimum": 0},
                    "j": {"type": "integer", "minimum": 0},
                    "expr": _EXPR,
                },
                "additionalProperties": False,
            },
        },
        "xi": {"oneOf": [{"type": "null"}, {"type": "array", "items": _EXPR}]},
        "S": {"oneOf": [{"type": "null"}, _FORM]},
        "domain": {
            "type": "object",
            "additionalProperties": {
                "type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2,
            },
        },
        "manifest": {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "string"}}]},
        "fields": {
            "type": "object",
            "additionalProperties": {"oneOf": [_EXPR, {"type": "array", "items": _EXPR}, _FORM]},
        },
        "meta": {"type": "object"},
    },
    "additionalProperties": False,
}

CATALOG_REF_SCHEMA = {
    "type": "object",
    "required": ["catalog"],
    "properties": {
        "catalog": {"type": "string"},
        "params": {"type": "object", "additionalProperties": {"type": ["number", "string"]}},
    },
    "additionalProperties": False,
}


def _validate(doc, schema):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SpecError(f"schema violation at {where}: {exc.message}") from None


def _form_from_json(rows):
    return {(r["i"], r["j"], r["k"]): r["expr"] for r in rows}


def spec_from_dict(doc) -> MetricSpec:
    """Build a spec from parsed JSON (schema form or a catalog reference)."""
    if isinstance(doc, dict) and "catalog" in doc:
        _validate(doc, CATALOG_REF_SCHEMA)
        from . import catalog

        return catalog.build(doc["catalog"], **doc.get("params", {}))
    _validate(doc, SPEC_SCHEMA)
    from .catalog import build_spec

    coords = doc["coords"]
    if doc["dim"] != len(coords):
        raise SpecError("dim does not match the number of coordinates")
    if set(doc["domain"]) != set(coords):
        raise SpecError("domain must give one interval for every coordinate")
    metric = {}
    for r in doc["metric"]:
        key = (min(r["i"], r["j"]), max(r["i"], r["j"]))
        if key in metric:
            raise SpecError(f"metric entry {key} given twice")
        if key[1] >= len(coords):
            raise SpecError(f"metric entry {key} out of range")
        metric[key] = r["expr"]
    S = None
    if doc.get("S"):
        S = {}
        for r in doc["S"]:
            key = (r["i"], r["j"], r["k"])
            if not (key[0] < key[1] < key[2] < len(coords)):
                raise SpecError(f"S entry {key} needs strictly increasing indices below dim")
            S[key] = r["expr"]
    fields = {}
    for k, v in (doc.get("fields") or {}).items():
        if isinstance(v, list) and v and isinstance(v[0], dict):
            fields[k] = _form_from_json(v)
        else:
            fields[k] = v
    try:
        return build_spec(
            doc["name"], coords, doc.get("params", {}), metric, doc.get("xi"), S,
            domain=[doc["domain"][c] for c in coords],
            manifest=doc.get("manifest"), fields=fields, meta=doc.get("meta", {}),
        )
    except ExprError as exc:
        raise SpecError(f"bad expression: {exc}") from None


def load_spec(path) -> MetricSpec:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return spec_from_dict(doc)


def spec_to_dict(spec: MetricSpec) -> dict:
    def form(entries):
        return [
            {"i": i, "j": j, "k": k, "expr": e if isinstance(e, str) else e.to_string()}
            for (i, j, k), e in sorted(entries.items())
        ]

    fields = {}
    for k, v in spec.fields.items():
        if isinstance(v, dict):
            fields[k] = form(v)
        elif isinstance(v, (list, tuple)):
            fields[k] = [e.to_string() for e in v]
        else:
            fields[k] = v.to_string()
    doc = {
        "name": spec.name,
        "dim": spec.dim,
        "coords": list(spec.coords),
        "params": {k: float(v) for k, v in spec.params.items()},
        "metric": [
            {"i": i, "j": j, "expr": e.to_string()} for (i, j), e in sorted(spec.metric.items())
        ],
        "xi": None if spec.xi is None else [e.to_string() for e in spec.xi],
        "S": None if not spec.S else form(spec.S),
        "domain": {c: [float(lo), float(hi)] for c, (lo, hi) in zip(spec.coords, spec.domain)},
        "manifest": None if spec.manifest is None else list(spec.manifest),
    }
    if fields:
        doc["fields"] = fields
    if spec.meta:
        doc["meta"] = dict(spec.meta)
    return doc


def dump_spec(spec: MetricSpec, path=None) -> str:
    text = json.dumps(spec_to_dict(spec), indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text

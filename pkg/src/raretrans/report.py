"""Report documents: payload builders, the published schema, validation."""

from __future__ import annotations

import hashlib
import json
import math
import os
from datetime import datetime, timezone
from fractions import Fraction

import jsonschema

from raretrans import __version__
from raretrans.cycles import Cycle, CycleTree
from raretrans.landscape import Landscape
from raretrans.metastability import GateAnalysis, MetaSets, StabilityRecord
from raretrans.model import INF, Model, fmt_rate, model_document

EXACT = {"type": "string", "pattern": r"^(Infinity|-?\d+(\.\d+)?|-?\d+/\d+)$"}
LABELS = {"type": "array", "items": {"type": "string"}}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "raretrans report",
    "type": "object",
    "required": ["tool_version", "model_digest", "command", "parameters", "payload", "timestamps"],
    "additionalProperties": False,
    "properties": {
        "tool_version": {"type": "string"},
        "model_digest": {"type": "string", "pattern": "^sha256:[0-9a-f]{64}$"},
        "command": {"enum": ["validate", "analyze", "gates", "simulate"]},
        "parameters": {"type": "object"},
        "payload": {"type": "object"},
        "timestamps": {
            "type": "object",
            "required": ["created"],
            "properties": {"created": {"type": "string"}},
        },
    },
    "allOf": [
        {
            "if": {"properties": {"command": {"const": "analyze"}}},
            "then": {"properties": {"payload": {
                "type": "object",
                "required": ["states", "energy", "heights", "cycle_tree", "stability",
                             "stable", "V_max", "metastable", "level_sets"],
                "properties": {
                    "energy": {"type": "object", "additionalProperties": EXACT},
                    "heights": {"type": "array", "items": {"type": "array", "items": EXACT}},
                    "stable": LABELS,
                    "metastable": LABELS,
                    "V_max": {"anyOf": [EXACT, {"type": "null"}]},
                    "level_sets": {"type": "object", "additionalProperties": LABELS},
                },
            }}},
        },
        {
            "if": {"properties": {"command": {"const": "gates"}}},
            "then": {"properties": {"payload": {
                "type": "object",
                "required": ["pair", "enclosing_cycle", "decomposition", "saddles",
                             "minimal_gates", "gate_union", "optimal_paths", "truncated"],
                "properties": {
                    "saddles": LABELS,
                    "minimal_gates": {"type": "array", "items": LABELS},
                    "gate_union": LABELS,
                    "truncated": {"type": "boolean"},
                },
            }}},
        },
        {
            "if": {"properties": {"command": {"const": "simulate"}}},
            "then": {"properties": {"payload": {
                "type": "object",
                "required": ["name", "parameters", "master_seed", "seeds", "rows", "status"],
                "properties": {
                    "status": {"enum": ["pass", "fail", "inconclusive"]},
                    "rows": {"type": "array", "items": {
                        "type": "object",
                        "required": ["beta", "statistic", "value", "stderr"],
                    }},
                },
            }}},
        },
    ],
}


def model_digest(model: Model) -> str:
    canonical = json.dumps(model_document(model), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


def _created() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = (datetime.fromtimestamp(int(epoch), timezone.utc) if epoch
              else datetime.now(timezone.utc))
    return moment.isoformat().replace("+00:00", "Z")


def jsonable(value):
    """Exact numbers become decimal strings, sets sorted lists, bad floats strings."""
    if isinstance(value, Fraction):
        return fmt_rate(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        if math.isnan(value):
            return "NaN"
        return value
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def _exact(value) -> str:
    return fmt_rate(value) if value != INF else "Infinity"


def cycle_summary(c: Cycle) -> dict:
    return {
        "members": sorted(c.members),
        "bottom_energy": _exact(c.bottom_energy),
        "depth": _exact(c.depth),
        "exit_level": _exact(c.exit_level),
        "principal_boundary": sorted(c.principal_boundary),
    }


def cycle_tree_payload(tree: CycleTree) -> dict:
    def build(c: Cycle) -> dict:
        node = cycle_summary(c)
        node["children"] = [build(d) for d in sorted(tree.children(c), key=lambda d: sorted(d.members))]
        return node

    return build(tree.root)


def analysis_payload(
    land: Landscape, tree: CycleTree, records: dict[str, StabilityRecord], meta: MetaSets
) -> dict:
    return {
        "states": list(land.states),
        "energy": {s: _exact(v) for s, v in zip(land.states, land.h)},
        "heights": [[_exact(v) for v in row] for row in land.phi],
        "cycle_tree": cycle_tree_payload(tree),
        "stability": {
            s: {"level": _exact(r.level), "below_set": sorted(r.below_set)}
            for s, r in records.items()
        },
        "stable": sorted(meta.stable),
        "V_max": None if meta.vmax is None else _exact(meta.vmax),
        "metastable": sorted(meta.metastable),
        "level_sets": {_exact(a): sorted(s) for a, s in meta.level_sets.items()},
        "note": meta.note,
    }


def gates_payload(result: GateAnalysis) -> dict:
    return {
        "pair": list(result.pair),
        "enclosing_cycle": cycle_summary(result.enclosing_cycle),
        "decomposition": [cycle_summary(c) for c in result.decomposition],
        "saddles": sorted(result.saddles),
        "minimal_gates": [sorted(g) for g in result.minimal_gates],
        "gate_union": sorted(result.gate_union),
        "optimal_paths": [
            {"states": list(p.states), "elevation": _exact(p.elevation)}
            for p in result.optimal_paths
        ],
        "truncated": result.truncated,
    }


def make_report(model: Model, command: str, parameters: dict, payload: dict) -> dict:
    doc = {
        "tool_version": __version__,
        "model_digest": model_digest(model),
        "command": command,
        "parameters": jsonable(parameters),
        "payload": jsonable(payload),
        "timestamps": {"created": _created()},
    }
    validate_report(doc)
    return doc


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, REPORT_SCHEMA)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def without_timestamps(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "timestamps"}

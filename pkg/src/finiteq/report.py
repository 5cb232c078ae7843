"""Deterministic machine-readable reports for batch runs.

Reports serialize to canonical JSON (sorted keys, fixed schema version) or
to a flat ``key = value`` text rendering.  Identical inputs and flags give
byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .core import EquivalenceRelation, PartialInjection, Relation
from .errors import RangeError
from .formulas import Formula, format_formula

SCHEMA_VERSION = 1


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_text(text: str) -> str:
    return digest_bytes(text.encode("utf-8"))


def jsonable(value):
    """Canonical JSON value for the toolkit's structures."""
    if isinstance(value, Relation):
        return {"arity": value.arity, "tuples": [list(t) for t in value.sorted_tuples()]}
    if isinstance(value, EquivalenceRelation):
        return {"blocks": sorted(sorted(b) for b in value.blocks)}
    if isinstance(value, PartialInjection):
        return {"pairs": sorted(list(p) for p in value.pairs)}
    if isinstance(value, Formula):
        return format_formula(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, str, float)):
        return value
    raise RangeError(f"cannot serialize {type(value).__name__} into a report")


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        from . import __version__

        return {
            "schema": SCHEMA_VERSION,
            "version": __version__,
            "command": self.command,
            "inputs": jsonable(self.inputs),
            "results": jsonable(self.results),
            "budgets": jsonable(self.budgets),
            "warnings": list(self.warnings),
        }


def _flatten(prefix, value, lines):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], lines)
    elif isinstance(value, list):
        lines.append(f"{prefix} = {json.dumps(value, sort_keys=True)}")
    else:
        lines.append(f"{prefix} = {json.dumps(value)}")


def write_report(report: Report, format: str = "json") -> bytes:
    data = report.to_dict()
    if format == "json":
        return (json.dumps(data, sort_keys=True, indent=2) + "\n").encode("utf-8")
    if format == "text":
        lines: list = []
        _flatten("", data, lines)
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise RangeError(f"unknown report format {format!r}")

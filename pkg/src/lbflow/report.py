"""Check entries and the JSON report document."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from .expr import Zero

SCHEMA_VERSION = 1
VERDICTS = ("pass", "fail", "unknown", "skipped")


@dataclass
class CheckEntry:
    name: str
    verdict: str
    residual: Any = None
    witness: Any = None
    mode: str = "symbolic"
    gating: bool = True
    detail: Any = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "residual": jsonable(self.residual),
            "witness": jsonable(self.witness),
            "mode": self.mode,
            "gating": self.gating,
            "detail": jsonable(self.detail),
        }


def verdict_from_zero(states: Iterable[Zero]) -> str:
    """pass if every state is provably zero, fail if any is provably nonzero."""
    states = list(states)
    if any(s is Zero.NONZERO for s in states):
        return "fail"
    if all(s is Zero.ZERO for s in states):
        return "pass"
    return "unknown"


def combine(verdicts: Iterable[str]) -> str:
    vs = [v for v in verdicts if v != "skipped"]
    if not vs:
        return "skipped"
    if "fail" in vs:
        return "fail"
    if "unknown" in vs:
        return "unknown"
    return "pass"


def jsonable(v):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            return str(v)
        return float(repr(v)) if abs(v) >= 1e-300 or v == 0 else 0.0
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, Zero):
        return v.value
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return str(v)


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def build_document(entries: list, *, tool_version: str, input_text: str, seed: int,
                   verdict: str, extra: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": tool_version,
        "input_sha256": input_digest(input_text),
        "seed": seed,
        "verdict": verdict,
        "checks": [e.to_dict() for e in entries],
    }
    if extra:
        doc.update(jsonable(extra))
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

"""Report records and their serialization.

Numbers are written as decimal strings: floats via ``repr`` (shortest string
that round-trips), exact rationals as "num/den".  The fingerprint is a hash
of the canonical JSON of whatever configuration produced a report, so equal
configurations always hash equally.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Iterable, Mapping

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"

CSV_COLUMNS = ("k", "x", "h", "predicted", "uncertainty", "actual", "rel_err", "fingerprint")


def format_number(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    # numpy scalars and mpmath numbers
    if hasattr(v, "item"):
        return format_number(v.item())
    return str(v)


def encode(obj: Any) -> Any:
    """Recursively turn a report payload into JSON-ready data with string numbers."""
    if isinstance(obj, Mapping):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    return format_number(obj)


def canonical_json(obj: Any) -> str:
    return json.dumps(encode(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def fingerprint(config: Any) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class PredictionReport:
    k: int
    x: float
    h: int
    predicted: float
    uncertainty: float
    actual: float
    fingerprint: str
    extra: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def rel_err(self) -> float:
        return abs(self.predicted - self.actual) / max(abs(self.actual), 1.0)

    def row(self) -> dict:
        return {
            "k": self.k,
            "x": self.x,
            "h": self.h,
            "predicted": self.predicted,
            "uncertainty": self.uncertainty,
            "actual": self.actual,
            "rel_err": self.rel_err,
            "fingerprint": self.fingerprint,
        }


def envelope(command: str, config: Mapping, rows: Iterable, diagnostics: Iterable = (),
             timestamp: str | None = None) -> dict:
    """The JSON report wrapper.  Everything but ``timestamp`` is fingerprinted."""
    rows = [r.row() if isinstance(r, PredictionReport) else r for r in rows]
    body = {
        "schema": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "command": command,
        "config": dict(config),
        "rows": rows,
        "diagnostics": list(diagnostics),
    }
    env = encode(body)
    env["fingerprint"] = fingerprint(body)
    env["timestamp"] = timestamp or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return env


def fingerprinted_region(env: Mapping) -> dict:
    return {k: v for k, v in env.items() if k != "timestamp"}


def dumps_json(env: Mapping) -> str:
    return json.dumps(env, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def loads_json(text: str) -> dict:
    return json.loads(text)


def dumps_csv(rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        r = r.row() if isinstance(r, PredictionReport) else r
        w.writerow([r[c] if isinstance(r[c], str) else format_number(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def loads_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [dict(r) for r in reader]

"""Report containers and their JSON / CSV forms.

Floats are written with 17 significant digits so a report read back
reproduces every value bit for bit; non-finite values become ``null``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    # JSON needs a digit around the exponent marker; ".17g" always gives one
    return text


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text with 17-significant-digit floats and ``null`` for nan/inf."""
    return _encode(obj, indent, 0)


def _encode(obj, indent, level) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict, str)):
        # numpy scalar
        return _encode(obj.item(), indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = "," if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    if hasattr(obj, "to_dict"):
        return _encode(obj.to_dict(), indent, level)
    if hasattr(obj, "tolist"):
        return _encode(obj.tolist(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


CSV_FIELDS = ("case", "seed", "index", "lhs", "factor_A", "factor_B", "ratio")


@dataclass
class VerificationReport:
    case: dict
    grid: dict
    corpus: dict
    records: list
    aggregate: dict
    provenance: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return self.aggregate.get("flagged", 0) > 0

    def to_dict(self) -> dict:
        out = {
            "case": self.case,
            "grid": self.grid,
            "corpus": self.corpus,
            "aggregate": self.aggregate,
            "records": [r.to_dict() for r in self.records],
            "provenance": self.provenance,
        }
        if self.extras:
            out["extras"] = self.extras
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.records:
            w.writerow([
                self.case["id"], r.seed, r.index,
                _fmt_float(r.lhs), _fmt_float(r.factor_A), _fmt_float(r.factor_B),
                _fmt_float(r.ratio),
            ])
        return buf.getvalue()

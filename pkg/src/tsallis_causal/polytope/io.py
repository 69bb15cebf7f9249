"""Text and JSON formats for rational systems.

Text layout, one row per line::

    # dim 3
    # labels X Y XY
    1 1 -1 >= 0
    1 0 0 = 3/2

Blank lines and other ``#`` lines are ignored.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .system import RELATIONS, RationalSystem, Row


def to_text(system: RationalSystem) -> str:
    lines = [f"# dim {system.dimension}"]
    if system.labels:
        lines.append("# labels " + " ".join(str(l) for l in system.labels))
    for r in system.rows:
        lines.append(" ".join(str(c) for c in r.coeffs) + f" {r.relation} {r.const}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> RationalSystem:
    dim, labels, rows = None, None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["dim"]:
                dim = int(parts[1])
            elif parts[:1] == ["labels"]:
                labels = tuple(parts[1:])
            continue
        tokens = line.split()
        rel_pos = [i for i, t in enumerate(tokens) if t in RELATIONS]
        if len(rel_pos) != 1 or rel_pos[0] != len(tokens) - 2:
            raise ValueError(f"line {lineno}: expected 'c1 ... cn REL const', got {raw!r}")
        k = rel_pos[0]
        try:
            rows.append(Row(tuple(Fraction(t) for t in tokens[:k]), Fraction(tokens[-1]), tokens[k]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if dim is None:
        if not rows:
            raise ValueError("empty system without a '# dim' header")
        dim = rows[0].dimension
    return RationalSystem(dim, tuple(rows), labels)


def to_dict(system: RationalSystem) -> dict:
    return {
        "dimension": system.dimension,
        "labels": list(system.labels) if system.labels else None,
        "rows": [{"coefficients": [str(c) for c in r.coeffs], "relation": r.relation, "constant": str(r.const)}
                 for r in system.rows],
    }


def from_dict(data: dict) -> RationalSystem:
    rows = [Row(tuple(Fraction(c) for c in d["coefficients"]), Fraction(d["constant"]), d["relation"])
            for d in data["rows"]]
    return RationalSystem(int(data["dimension"]), tuple(rows), data.get("labels"))


def to_json(system: RationalSystem, **kw) -> str:
    return json.dumps(to_dict(system), **kw)


def from_json(text: str) -> RationalSystem:
    return from_dict(json.loads(text))

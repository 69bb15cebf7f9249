"""Rational linear systems ``a . x >= b`` / ``a . x = b``."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

GE = ">="
EQ = "="
RELATIONS = (GE, EQ)


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats are taken at face value; callers wanting 1/3 should pass a Fraction
        return Fraction(value)
    return Fraction(value)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class Row:
    """One constraint ``coeffs . x (>= | =) const``."""

    coeffs: tuple
    const: Fraction
    relation: str = GE

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {self.relation!r}")

    @classmethod
    def make(cls, coeffs: Iterable, const=0, relation: str = GE) -> "Row":
        return cls(tuple(as_fraction(c) for c in coeffs), as_fraction(const), relation)

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    def value(self, point: Sequence) -> Fraction:
        return sum((c * p for c, p in zip(self.coeffs, point) if c), Fraction(0))

    def satisfied_by(self, point: Sequence) -> bool:
        v = self.value(point)
        return v >= self.const if self.relation == GE else v == self.const

    def normalized(self) -> "Row":
        """Scale to coprime integers; equalities also get a positive leading coefficient."""
        nums = [c for c in self.coeffs if c] + ([self.const] if self.const else [])
        if not nums:
            return self
        den = 1
        for v in nums:
            den = _lcm(den, v.denominator)
        g = 0
        for v in nums:
            g = gcd(g, int(v * den))
        scale = Fraction(den, g)
        if self.relation == EQ:
            lead = next((c for c in self.coeffs if c), self.const)
            if lead < 0:
                scale = -scale
        return Row(tuple(c * scale for c in self.coeffs), self.const * scale, self.relation)

    def negated(self) -> "Row":
        return Row(tuple(-c for c in self.coeffs), -self.const, self.relation)


@dataclass(frozen=True)
class RationalSystem:
    dimension: int
    rows: tuple = ()
    labels: tuple | None = None

    def __post_init__(self):
        rows = tuple(self.rows)
        for r in rows:
            if r.dimension != self.dimension:
                raise ValueError(f"row has length {r.dimension}, system dimension is {self.dimension}")
        object.__setattr__(self, "rows", rows)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.dimension:
                raise ValueError("one label per coordinate required")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_rows(cls, rows: Iterable, dimension: int | None = None, labels=None) -> "RationalSystem":
        built = []
        for r in rows:
            if isinstance(r, Row):
                built.append(r)
            else:
                coeffs, const, *rest = r
                built.append(Row.make(coeffs, const, rest[0] if rest else GE))
        if dimension is None:
            if not built:
                raise ValueError("dimension required for an empty system")
            dimension = built[0].dimension
        return cls(dimension, tuple(built), labels)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def inequalities(self) -> list:
        return [r for r in self.rows if r.relation == GE]

    @property
    def equalities(self) -> list:
        return [r for r in self.rows if r.relation == EQ]

    def with_rows(self, rows: Iterable) -> "RationalSystem":
        return RationalSystem(self.dimension, tuple(rows), self.labels)

    def contains(self, point: Sequence) -> bool:
        return all(r.satisfied_by(point) for r in self.rows)

    def deduplicated(self) -> "RationalSystem":
        """Normalize rows, drop exact duplicates and trivially true rows."""
        seen = set()
        out = []
        for r in self.rows:
            if r.is_trivial():
                ok = (0 >= r.const) if r.relation == GE else (r.const == 0)
                if ok:
                    continue
            n = r.normalized()
            if n in seen:
                continue
            seen.add(n)
            out.append(n)
        return self.with_rows(out)

    def drop_coordinate(self, index: int) -> "RationalSystem":
        """Remove a coordinate whose coefficient is zero in every row."""
        if any(r.coeffs[index] for r in self.rows):
            raise ValueError(f"coordinate {index} still appears in the system")
        rows = [Row(r.coeffs[:index] + r.coeffs[index + 1:], r.const, r.relation) for r in self.rows]
        labels = None if self.labels is None else self.labels[:index] + self.labels[index + 1:]
        return RationalSystem(self.dimension - 1, tuple(rows), labels)

    def to_float_arrays(self):
        import numpy as np

        ge = self.inequalities
        eq = self.equalities
        A = np.array([[float(c) for c in r.coeffs] for r in ge], dtype=float).reshape(len(ge), self.dimension)
        b = np.array([float(r.const) for r in ge], dtype=float)
        E = np.array([[float(c) for c in r.coeffs] for r in eq], dtype=float).reshape(len(eq), self.dimension)
        e = np.array([float(r.const) for r in eq], dtype=float)
        return A, b, E, e

"""Linear entropy constraints: Shannon elementals, causal equalities, Tsallis causal bounds.

Coordinates are the non-empty subsets of a declared universe of variables;
internally a subset is a bitmask over the universe order (bit ``i`` is
``universe[i]``), and coordinate ``mask - 1`` in dense vectors.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .causal import CiStatement, Dag, enumerate_ci_statements, markov_ci_list
from .polytope.system import EQ, GE, RationalSystem, Row
from .tsallis import EntropyVector, bound_f, bound_f_decimal, integer_order, mask_names

TAGS = ("elemental-monotonicity", "elemental-submodularity", "causal-shannon", "causal-tsallis", "derived")


def _mask(names: Iterable[str], universe: Sequence[str]) -> int:
    m = 0
    for n in names:
        try:
            m |= 1 << universe.index(n)
        except ValueError:
            raise KeyError(f"{n!r} is not in the universe {list(universe)}") from None
    return m


@dataclass(frozen=True)
class LinearInequality:
    """``sum_S coeff[S] * H(S)  (>= | =)  bound`` with ``S`` a bitmask."""

    coefficients: tuple  # sorted (mask, Fraction) pairs, zero entries dropped
    bound: object = Fraction(0)  # Fraction or Decimal
    relation: str = GE
    tag: str = "derived"
    label: str = ""

    def __post_init__(self):
        coeffs = tuple(sorted((int(m), Fraction(c)) for m, c in self.coefficients if c))
        if not coeffs:
            raise ValueError("inequality needs at least one non-zero coefficient")
        if any(m <= 0 for m, _ in coeffs):
            raise ValueError("subset masks must be non-empty")
        object.__setattr__(self, "coefficients", coeffs)
        if self.relation not in (GE, EQ):
            raise ValueError(f"bad relation {self.relation!r}")
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")

    @classmethod
    def from_terms(cls, terms: Mapping[int, object], bound=Fraction(0), relation=GE, tag="derived", label=""):
        acc: dict = {}
        for m, c in terms.items():
            if m:
                acc[m] = acc.get(m, Fraction(0)) + Fraction(c)
        return cls(tuple(acc.items()), bound, relation, tag, label)

    @property
    def is_rational(self) -> bool:
        return isinstance(self.bound, (Fraction, int))

    def lhs(self, vector: Sequence) -> object:
        """Left-hand side on a dense coordinate vector (index ``mask - 1``)."""
        total = 0
        for m, c in self.coefficients:
            v = vector[m - 1]
            total = total + (c * v if isinstance(v, Fraction) else float(c) * float(v))
        return total

    def to_row(self, n: int) -> Row:
        if not self.is_rational:
            raise ValueError("row conversion needs a rational bound")
        dense = [Fraction(0)] * ((1 << n) - 1)
        for m, c in self.coefficients:
            dense[m - 1] = c
        return Row(tuple(dense), Fraction(self.bound), self.relation)

    def to_dict(self, universe: Sequence[str]) -> dict:
        return {
            "coefficients": [[list(mask_names(m, universe)), str(c)] for m, c in self.coefficients],
            "relation": self.relation,
            "bound": str(self.bound),
            "tag": self.tag,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: Mapping, universe: Sequence[str]) -> "LinearInequality":
        bound = data.get("bound", "0")
        try:
            bound = Fraction(bound)
        except ValueError:
            bound = Decimal(bound)
        terms = {}
        for names, c in data["coefficients"]:
            m = _mask(names, list(universe))
            terms[m] = terms.get(m, Fraction(0)) + Fraction(c)
        return cls.from_terms(terms, bound, data.get("relation", GE), data.get("tag", "derived"), data.get("label", ""))


@dataclass(frozen=True)
class InequalitySystem:
    universe: tuple
    inequalities: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        top = 1 << len(self.universe)
        for ineq in self.inequalities:
            if any(m >= top for m, _ in ineq.coefficients):
                raise ValueError("inequality refers to variables outside the universe")

    def __len__(self) -> int:
        return len(self.inequalities)

    def __iter__(self):
        return iter(self.inequalities)

    @property
    def dimension(self) -> int:
        return (1 << len(self.universe)) - 1

    def __add__(self, other: "InequalitySystem") -> "InequalitySystem":
        if other.universe != self.universe:
            raise ValueError("cannot combine systems over different universes")
        return InequalitySystem(self.universe, self.inequalities + other.inequalities)

    def count_by_tag(self) -> dict:
        out: dict = {}
        for ineq in self.inequalities:
            out[ineq.tag] = out.get(ineq.tag, 0) + 1
        return out

    def coordinate_labels(self) -> tuple:
        return tuple("".join(mask_names(m, self.universe)) for m in range(1, 1 << len(self.universe)))

    def to_rational_system(self) -> RationalSystem:
        n = len(self.universe)
        return RationalSystem(self.dimension, tuple(i.to_row(n) for i in self.inequalities), self.coordinate_labels())

    def to_dict(self) -> dict:
        return {
            "universe": list(self.universe),
            "inequalities": [i.to_dict(self.universe) for i in self.inequalities],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "InequalitySystem":
        universe = tuple(data["universe"])
        return cls(universe, tuple(LinearInequality.from_dict(d, universe) for d in data["inequalities"]))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "InequalitySystem":
        return cls.from_dict(json.loads(text))


# -- generators ------------------------------------------------------------------

def cmi_terms(x: int, y: int, z: int = 0) -> dict:
    """Coefficients of ``I(X:Y|Z) = H(XZ) + H(YZ) - H(XYZ) - H(Z)`` on masks."""
    terms: dict = {}
    for m, c in ((x | z, 1), (y | z, 1), (x | y | z, -1), (z, -1)):
        if m:
            terms[m] = terms.get(m, 0) + c
    return terms


def shannon_elemental(universe) -> InequalitySystem:
    """Monotonicity ``H(all) - H(all - i) >= 0`` and elemental ``I(i:j|K) >= 0``."""
    if isinstance(universe, int):
        universe = [f"X{i + 1}" for i in range(universe)]
    universe = tuple(universe)
    n = len(universe)
    if n < 2:
        raise ValueError("need at least two variables")
    full = (1 << n) - 1
    rows = []
    for i in range(n):
        terms = {full: 1}
        rest = full & ~(1 << i)
        if rest:
            terms[rest] = -1
        rows.append(LinearInequality.from_terms(terms, tag="elemental-monotonicity",
                                                label=f"H({universe[i]}|rest)>=0"))
    for i, j in combinations(range(n), 2):
        others = [k for k in range(n) if k not in (i, j)]
        for r in range(len(others) + 1):
            for K in combinations(others, r):
                z = sum(1 << k for k in K)
                rows.append(LinearInequality.from_terms(
                    cmi_terms(1 << i, 1 << j, z), tag="elemental-submodularity",
                    label=f"I({universe[i]}:{universe[j]}|{''.join(universe[k] for k in K)})>=0"))
    return InequalitySystem(universe, tuple(rows))


def elemental_count(n: int) -> int:
    if n < 3:
        raise ValueError("closed form used for n >= 3 only")
    return n + n * (n - 1) * 2 ** (n - 3)


def _statement_masks(st: CiStatement, universe: Sequence[str]):
    return _mask(st.X, universe), _mask(st.Y, universe), _mask(st.Z, universe)


def shannon_causal(dag: Dag) -> InequalitySystem:
    """Equalities ``I(node : nondesc | parents) = 0`` from the local Markov list."""
    universe = dag.names
    rows = []
    for st in dict.fromkeys(markov_ci_list(dag)):  # X⊥Y and Y⊥X can both appear
        x, y, z = _statement_masks(st, universe)
        rows.append(LinearInequality.from_terms(cmi_terms(x, y, z), relation=EQ, tag="causal-shannon", label=str(st)))
    return InequalitySystem(universe, tuple(rows))


def _product_dims(names: Sequence[str], dims: Mapping[str, int]) -> int:
    out = 1
    for n in names:
        out *= int(dims[n])
    return out


def tsallis_causal(dag: Dag, q, dims=None) -> InequalitySystem:
    """``-I_q(X:Y|Z) >= -f(q, d_X, d_Y)`` for every d-separation statement.

    ``dims`` is an int (all nodes), a mapping, or None (node cardinalities).
    Bounds are Fractions for integer ``q`` and 50-digit Decimals otherwise.
    """
    if float(q) < 1:
        raise ValueError("Tsallis causal constraints need q >= 1 (strong subadditivity fails below)")
    if dims is None:
        dims = {n: dag.cardinality(n) for n in dag.names}
    elif isinstance(dims, int):
        dims = {n: dims for n in dag.names}
    universe = dag.names
    qi = integer_order(q)
    rows = []
    for st in enumerate_ci_statements(dag):
        dx, dy = _product_dims(st.X, dims), _product_dims(st.Y, dims)
        if float(q) == 1.0:
            f = Fraction(0)
        elif qi is not None:
            f = bound_f(qi, dx, dy)
        else:
            f = bound_f_decimal(q, dx, dy)
        x, y, z = _statement_masks(st, universe)
        terms = {m: -c for m, c in cmi_terms(x, y, z).items()}
        rows.append(LinearInequality.from_terms(terms, -f, GE, "causal-tsallis", str(st)))
    return InequalitySystem(universe, tuple(rows))


# -- evaluation ------------------------------------------------------------------

@dataclass
class EvaluationReport:
    slacks: list
    violations: list = field(default_factory=list)  # (index, tag, label, slack)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, (Fraction, Decimal)) else float(f"{float(v):.12g}")
        return {
            "ok": self.ok,
            "slacks": [enc(s) for s in self.slacks],
            "violations": [{"index": i, "tag": t, "label": l, "slack": enc(s)} for i, t, l, s in self.violations],
        }


def evaluate(system: InequalitySystem, vector, tol: float = 1e-9) -> EvaluationReport:
    """Slack ``LHS - bound`` for ``>=`` rows and ``|LHS - bound|`` for ``=`` rows."""
    if isinstance(vector, EntropyVector):
        if tuple(vector.names) != tuple(system.universe):
            raise ValueError(f"vector over {vector.names} but system over {system.universe}")
        values = vector.values
    else:
        values = list(vector)
        if len(values) != system.dimension:
            raise ValueError("vector length does not match the system universe")
    exact = all(isinstance(v, (Fraction, int)) for v in values)
    slacks, bad = [], []
    for k, ineq in enumerate(system.inequalities):
        lhs = ineq.lhs(values)
        if exact and ineq.is_rational:
            s = Fraction(lhs) - Fraction(ineq.bound)
            thr = 0
        else:
            s = float(lhs) - float(ineq.bound)
            thr = tol
        if ineq.relation == EQ:
            s = abs(s)
            violated = s > thr
        else:
            violated = s < -thr
        slacks.append(s)
        if violated:
            bad.append((k, ineq.tag, ineq.label, s))
    return EvaluationReport(slacks, bad)


def nonredundancy_audit(system: InequalitySystem, indices: Iterable[int] | None = None,
                        hint: bool = True) -> list:
    """``(inequality, redundant)`` per audited row: redundant iff implied by the others.

    Among exact copies of one row only the first is kept when checking an
    earlier copy, so a duplicated inequality flags its later copies only.
    """
    from .polytope.lp import is_implied

    rs = system.to_rational_system()
    rows = list(rs.rows)
    norm = [r.normalized() for r in rows]
    out = []
    idx = range(len(rows)) if indices is None else indices
    for k in idx:
        rest = rs.with_rows(r for j, r in enumerate(rows) if j != k and not (j > k and norm[j] == norm[k]))
        out.append((system.inequalities[k], is_implied(rows[k], rest, hint)))
    return out

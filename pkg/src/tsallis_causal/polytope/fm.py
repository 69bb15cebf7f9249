"""Redundancy removal and Fourier-Motzkin elimination in exact arithmetic."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .lp import is_implied
from .system import EQ, GE, RationalSystem, Row

log = logging.getLogger(__name__)


WITNESS_BOX = 1e3


def _integer_rows(rows: Sequence[Row]):
    """Each ``c . x >= d`` row scaled to integer ``c`` and ``d`` (same direction)."""
    out = []
    for r in rows:
        den = 1
        for v in (*r.coeffs, r.const):
            den = den * Fraction(v).denominator // _gcd(den, Fraction(v).denominator)
        out.append(([int(Fraction(v) * den) for v in r.coeffs], int(Fraction(r.const) * den)))
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _witness(k: int, alive: list, A, b):
    """Float point strictly inside every live row except ``k`` and strictly violating ``k``.

    Maximises a common margin ``t`` (capped at 1) inside a box; returns the
    point or None when the margin is not clearly positive.
    """
    from scipy.optimize import linprog

    others = [i for i in alive if i != k]
    n = A.shape[1]
    # variables (x, t); rows  A_o x - t >= b_o  and  -a_k x - t >= -b_k
    M = np.vstack([A[others], -A[k:k + 1]])
    rhs = np.concatenate([b[others], [-b[k]]])
    A_ub = -np.hstack([M, -np.ones((len(M), 1))])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(-WITNESS_BOX, WITNESS_BOX)] * n + [(None, 1.0)]
    try:
        res = linprog(c, A_ub=A_ub, b_ub=-rhs, bounds=bounds, method="highs")
    except ValueError:
        return None
    if res.status != 0 or -res.fun < 1e-7:
        return None
    return res.x[:n]


def _certifies(x, k: int, alive: list, irows) -> bool:
    """Exact check that dyadic point ``x`` satisfies the live rows and violates row ``k``."""
    fr = [Fraction(float(v)) for v in x]
    scale = max(f.denominator for f in fr)  # a power of two, so a common denominator
    X = [int(f * scale) for f in fr]
    for i in alive:
        c, d = irows[i]
        satisfied = sum(ci * xi for ci, xi in zip(c, X) if ci) >= d * scale
        if satisfied == (i == k):
            return False
    return True


def _solve_support(columns: list, target: list):
    """Exact ``y`` with ``sum_i y_i columns[i] = target``, or None when inconsistent.

    Gauss-Jordan elimination over Fractions on the (few) support columns;
    free variables are set to zero.
    """
    m = len(target)
    s = len(columns)
    M = [[Fraction(columns[i][r]) for i in range(s)] + [Fraction(target[r])] for r in range(m)]
    pivots, row = [], 0
    for col in range(s):
        piv = next((r for r in range(row, m) if M[r][col]), None)
        if piv is None:
            continue
        M[row], M[piv] = M[piv], M[row]
        inv = 1 / M[row][col]
        M[row] = [v * inv for v in M[row]]
        for r in range(m):
            if r != row and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    if any(M[r][s] for r in range(row, m)):
        return None
    y = [Fraction(0)] * s
    for r, col in enumerate(pivots):
        y[col] = M[r][s]
    return y


def _dual_certificate(k: int, alive: list, A, b, irows) -> bool:
    """Float LP duals suggest which rows imply row ``k``; confirm with exact multipliers."""
    from scipy.optimize import linprog

    others = [i for i in alive if i != k]
    A_ub = -np.vstack([A[others], A[k:k + 1]])
    b_ub = -np.concatenate([b[others], [b[k] - 1.0]])
    try:
        res = linprog(A[k], A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * A.shape[1], method="highs")
    except ValueError:
        return False
    if res.status != 0 or res.fun < b[k] - 1e-9 * (1.0 + abs(b[k])):
        return False
    duals = -res.ineqlin.marginals[:-1]
    support = [others[i] for i in np.flatnonzero(duals > 1e-9)]
    if not support:
        return False
    y = _solve_support([irows[i][0] for i in support], irows[k][0])
    if y is None or any(v < 0 for v in y):
        return False
    return sum(v * irows[i][1] for v, i in zip(y, support)) >= irows[k][1]


def remove_redundant(system: RationalSystem, hint: bool = True, float_filter: bool = True) -> RationalSystem:
    """Drop rows implied by the remaining ones.

    Duplicates and trivially true rows go first.  Then equalities are tested
    (removed only when implied *as equalities*), then inequalities, each in
    system order, always against the rows still present.

    With ``float_filter`` (used when the system has no equalities) floating
    LPs propose either a point that satisfies every other row and violates
    the one under test (keep) or the rows whose combination implies it
    (drop).  Either proposal is confirmed in exact arithmetic before it is
    acted on; unconfirmed cases go to the exact LP.
    """
    rows = list(system.deduplicated().rows)
    k = 0
    while k < len(rows):
        r = rows[k]
        if r.relation == EQ and is_implied(r, system.with_rows(rows[:k] + rows[k + 1:]), hint):
            del rows[k]
            continue
        k += 1
    eqs = [r for r in rows if r.relation == EQ]
    ges = [r for r in rows if r.relation == GE]
    use_filter = float_filter and ges and not eqs
    if use_filter:
        A, b, _, _ = system.with_rows(ges).to_float_arrays()
        irows = _integer_rows(ges)
    alive = list(range(len(ges)))
    for k in range(len(ges)):
        if use_filter:
            x = _witness(k, alive, A, b)
            if x is not None and _certifies(x, k, alive, irows):
                continue
            if _dual_certificate(k, alive, A, b, irows):
                alive.remove(k)
                continue
        rest = system.with_rows(eqs + [ges[i] for i in alive if i != k])
        if is_implied(ges[k], rest, hint):
            alive.remove(k)
    return system.with_rows(eqs + [ges[i] for i in alive])


@dataclass
class StepReport:
    coordinate: object
    rows_before: int
    positive: int
    negative: int
    rows_combined: int
    rows_after: int
    used_equality: bool = False
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ProjectionReport:
    system: RationalSystem
    steps: list = field(default_factory=list)
    completed: bool = True
    breach: str | None = None
    remaining: tuple = ()

    @property
    def eliminations(self) -> int:
        return len(self.steps)

    def row_counts(self) -> list:
        return [s.rows_after for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "completed": self.completed,
            "breach": self.breach,
            "eliminations": self.eliminations,
            "rows": len(self.system),
            "remaining_coordinates": list(self.remaining),
            "steps": [s.to_dict() for s in self.steps],
        }


class CapExceeded(RuntimeError):
    def __init__(self, reason: str, combined: int):
        super().__init__(reason)
        self.reason = reason
        self.combined = combined


def _combine(p: Row, n: Row, j: int) -> Row:
    a, b = p.coeffs[j], -n.coeffs[j]  # both positive
    coeffs = tuple(b * x + a * y for x, y in zip(p.coeffs, n.coeffs))
    return Row(coeffs, b * p.const + a * n.const, GE)


def _eliminate_rows(rows: list, j: int, max_rows: int | None = None):
    """Rows with coordinate ``j`` eliminated; returns (rows, pos, neg, used_eq)."""
    eqs = [r for r in rows if r.relation == EQ and r.coeffs[j]]
    if eqs:
        piv = eqs[0]
        out = []
        for r in rows:
            if r is piv:
                continue
            c = r.coeffs[j]
            if not c:
                out.append(r)
                continue
            t = c / piv.coeffs[j]
            out.append(Row(tuple(x - t * y for x, y in zip(r.coeffs, piv.coeffs)), r.const - t * piv.const, r.relation))
        return out, 0, 0, True
    zero = [r for r in rows if not r.coeffs[j]]
    pos = [r for r in rows if r.coeffs[j] > 0]
    neg = [r for r in rows if r.coeffs[j] < 0]
    if max_rows is not None and len(zero) + len(pos) * len(neg) > max_rows:
        raise CapExceeded("max_rows", len(zero) + len(pos) * len(neg))
    out = zero + [_combine(p, n, j) for p in pos for n in neg]
    return out, len(pos), len(neg), False


def fm_eliminate(system: RationalSystem, coordinate_index: int, redundancy: bool = True,
                 hint: bool = True) -> RationalSystem:
    """Project out one coordinate; the result keeps the dimension with a zero column."""
    if not 0 <= coordinate_index < system.dimension:
        raise IndexError(f"coordinate {coordinate_index} out of range")
    rows, *_ = _eliminate_rows(list(system.rows), coordinate_index)
    out = system.with_rows(rows).deduplicated()
    return remove_redundant(out, hint) if redundancy else out


def _choose(rows: Sequence[Row], candidates: Iterable[int]) -> int:
    best, best_score = None, None
    for j in candidates:
        if any(r.relation == EQ and r.coeffs[j] for r in rows):
            score = -1
        else:
            pos = sum(1 for r in rows if r.coeffs[j] > 0)
            neg = sum(1 for r in rows if r.coeffs[j] < 0)
            score = pos * neg
        if best_score is None or score < best_score:
            best, best_score = j, score
    return best


def project(system: RationalSystem, eliminate: Sequence[int], order: str | Sequence[int] = "auto",
            max_rows: int | None = None, max_eliminations: int | None = None,
            time_budget: float | None = None, redundancy: bool = True, hint: bool = True) -> ProjectionReport:
    """Eliminate the given coordinates, then drop them from the system.

    ``order="auto"`` picks, at each step, the coordinate minimizing
    ``#positive * #negative`` (equality substitution first).  Caps stop the
    run early and return a report with ``completed=False``.
    """
    start = time.monotonic()
    todo = list(dict.fromkeys(eliminate))
    fixed = None if order == "auto" else list(order)
    current = system.deduplicated()
    if redundancy:
        current = remove_redundant(current, hint)
    steps: list = []
    breach = None
    while todo:
        if max_eliminations is not None and len(steps) >= max_eliminations:
            breach = "max_eliminations"
            break
        if time_budget is not None and time.monotonic() - start > time_budget:
            breach = "time_budget"
            break
        j = fixed.pop(0) if fixed else _choose(current.rows, todo)
        t0 = time.monotonic()
        before = len(current)
        try:
            rows, npos, nneg, used_eq = _eliminate_rows(list(current.rows), j, max_rows)
        except CapExceeded as exc:
            steps.append(StepReport(current.labels[j] if current.labels else j, before,
                                    sum(1 for r in current.rows if r.coeffs[j] > 0),
                                    sum(1 for r in current.rows if r.coeffs[j] < 0),
                                    exc.combined, exc.combined, False, time.monotonic() - t0))
            steps[-1].rows_after = -1
            breach = "max_rows"
            break
        nxt = current.with_rows(rows).deduplicated()
        combined = len(nxt)
        if redundancy:
            nxt = remove_redundant(nxt, hint)
        todo.remove(j)
        label = current.labels[j] if current.labels else j
        steps.append(StepReport(label, before, npos, nneg, combined, len(nxt), used_eq, time.monotonic() - t0))
        log.info("eliminated %s: %d -> %d rows (%d before redundancy removal)", label, before, len(nxt), combined)
        current = nxt
        if max_rows is not None and len(current) > max_rows:
            breach = "max_rows"
            break
    # after a breach the last complete system is kept with all coordinates
    if breach is None:
        for j in sorted(set(eliminate), reverse=True):
            current = current.drop_coordinate(j)
    remaining = tuple(current.labels[j] for j in todo) if current.labels and breach else tuple(todo)
    return ProjectionReport(current, steps, breach is None, breach, remaining)

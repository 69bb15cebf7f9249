"""Exact linear programming over rational systems.

``lp_minimize`` solves ``min c.x`` subject to a :class:`RationalSystem` with
free variables.  Internally it works on the dual in standard form

    max  b.y   s.t.  sum_j y_j a_j = c,   y >= 0

(equality rows contribute a ``+a`` and a ``-a`` column), using a revised
simplex with Bland's rule in exact rational arithmetic.  The simplex
multipliers of an optimal dual basis are the primal optimum.

A floating-point solve (HiGHS through scipy) may be used to pick a starting
basis.  It never decides anything: the exact solver checks the basis and keeps
pivoting from there, or starts cold when the hint is useless.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .system import EQ, GE, RationalSystem, Row, as_fraction

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LpResult:
    """Outcome of :func:`lp_minimize`.

    ``certificate`` holds dual multipliers (one per system row) when optimal,
    an improving ray when unbounded, and Farkas multipliers when infeasible.
    """

    status: str
    value: Fraction | None = None
    x: tuple | None = None
    certificate: tuple | None = None
    pivots: int = 0
    warm_started: bool = False

    def __post_init__(self):
        if (self.value is not None) != (self.status == OPTIMAL):
            raise ValueError("value present iff status is optimal")


class _Simplex:
    """Revised simplex for ``max g.w  s.t.  M w = h, w >= 0`` with an explicit inverse."""

    def __init__(self, columns: list, h: list, g: list):
        self.m = len(h)
        self.cols = columns  # list of dict row -> Fraction
        self.n = len(columns)
        self.h = list(h)
        self.g = list(g)
        # artificial column for row i is sign(h_i) e_i, index n + i
        self.art_sign = [(-ONE if hi < 0 else ONE) for hi in self.h]
        self.basis = [self.n + i for i in range(self.m)]
        self.Binv = [{i: self.art_sign[i]} for i in range(self.m)]  # sparse rows
        self.w = [abs(hi) for hi in self.h]
        self.pivots = 0
        self.in_basis = set(self.basis)

    def column(self, j: int) -> dict:
        if j >= self.n:
            i = j - self.n
            return {i: self.art_sign[i]}
        return self.cols[j]

    def ftran(self, col: dict) -> list:
        out = [ZERO] * self.m
        for i, row in enumerate(self.Binv):
            s = ZERO
            if len(row) < len(col):
                for k, v in row.items():
                    c = col.get(k)
                    if c is not None:
                        s += v * c
            else:
                for k, c in col.items():
                    v = row.get(k)
                    if v is not None:
                        s += v * c
            out[i] = s
        return out

    def pivot(self, r: int, j: int, d: list) -> None:
        piv = d[r]
        rrow = {k: v / piv for k, v in self.Binv[r].items()}
        self.Binv[r] = rrow
        for i in range(self.m):
            di = d[i]
            if i == r or not di:
                continue
            row = self.Binv[i]
            for k, v in rrow.items():
                nv = row.get(k, ZERO) - di * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        self.in_basis.discard(self.basis[r])
        self.basis[r] = j
        self.in_basis.add(j)
        self.pivots += 1

    def recompute_w(self) -> None:
        self.w = [sum((v * self.h[k] for k, v in row.items()), ZERO) for row in self.Binv]

    def multipliers(self, costs) -> list:
        pi = [ZERO] * self.m
        for i, j in enumerate(self.basis):
            cb = costs(j)
            if cb:
                for k, v in self.Binv[i].items():
                    pi[k] += cb * v
        return pi

    def crash(self, candidates: Sequence[int]) -> None:
        """Pivot candidate columns into rows still held by artificials."""
        for j in candidates:
            if j in self.in_basis:
                continue
            d = self.ftran(self.cols[j])
            best = None
            for i in range(self.m):
                if d[i] and self.basis[i] >= self.n:
                    if best is None or abs(d[i]) > abs(d[best]):
                        best = i
            if best is not None:
                self.pivot(best, j, d)
        self.recompute_w()

    def reset(self) -> None:
        self.basis = [self.n + i for i in range(self.m)]
        self.in_basis = set(self.basis)
        self.Binv = [{i: self.art_sign[i]} for i in range(self.m)]
        self.w = [abs(hi) for hi in self.h]

    def iterate(self, costs, allow_artificial: bool):
        """Run Bland-rule pivots to optimality.  Returns (status, entering, d)."""
        limit = self.n + self.m
        while True:
            pi = self.multipliers(costs)
            entering = None
            for j in range(limit if allow_artificial else self.n):
                if j in self.in_basis:
                    continue
                col = self.column(j)
                rc = costs(j) - sum((pi[k] * v for k, v in col.items()), ZERO)
                if rc > 0:
                    entering = j
                    break
            if entering is None:
                return OPTIMAL, None, None
            d = self.ftran(self.column(entering))
            r = None
            best = None
            for i in range(self.m):
                if d[i] > 0:
                    ratio = self.w[i] / d[i]
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                        best, r = ratio, i
            if r is None:
                return UNBOUNDED, entering, d
            for i in range(self.m):
                if d[i]:
                    self.w[i] -= best * d[i]
            self.w[r] = best
            self.pivot(r, entering, d)

    def solve(self, candidates: Sequence[int] = ()):
        """Two-phase solve.  Returns (status, data)."""
        n = self.n
        if candidates:
            self.crash(candidates)
            if any(v < 0 for v in self.w):
                log.debug("crash basis not primal feasible; starting cold")
                self.reset()

        def phase1_cost(j):
            return -ONE if j >= n else ZERO

        if any(self.basis[i] >= n and self.w[i] for i in range(self.m)):
            self.iterate(phase1_cost, allow_artificial=False)
            infeas = sum((self.w[i] for i in range(self.m) if self.basis[i] >= n), ZERO)
            if infeas > 0:
                sigma = self.multipliers(phase1_cost)
                return INFEASIBLE, sigma
        # drive zero-valued artificials out where possible
        for r in range(self.m):
            if self.basis[r] < n:
                continue
            brow = self.Binv[r]
            for j in range(n):
                if j in self.in_basis:
                    continue
                col = self.cols[j]
                val = sum((brow[k] * v for k, v in col.items() if k in brow), ZERO)
                if val:
                    d = self.ftran(col)
                    self.pivot(r, j, d)
                    break
        self.recompute_w()

        g = self.g

        def phase2_cost(j):
            return ZERO if j >= n else g[j]

        status, entering, d = self.iterate(phase2_cost, allow_artificial=False)
        if status == UNBOUNDED:
            ray = [ZERO] * n
            ray[entering] = ONE
            for i, j in enumerate(self.basis):
                if j < n and d[i]:
                    ray[j] = -d[i]
            return UNBOUNDED, ray
        return OPTIMAL, self.multipliers(phase2_cost)


def _dual_data(system: RationalSystem, objective: Sequence[Fraction]):
    """Columns of the dual standard form plus the map back to system rows."""
    cols, g, owner = [], [], []
    for idx, row in enumerate(system.rows):
        col = {k: c for k, c in enumerate(row.coeffs) if c}
        cols.append(col)
        g.append(row.const)
        owner.append((idx, ONE))
        if row.relation == EQ:
            cols.append({k: -c for k, c in col.items()})
            g.append(-row.const)
            owner.append((idx, -ONE))
    return cols, list(objective), g, owner


def _float_hint(system: RationalSystem, objective, owner):
    """Candidate dual basis from a floating-point solve, or None."""
    try:
        import numpy as np
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return None
    A, b, E, e = system.to_float_arrays()
    c = np.array([float(v) for v in objective])
    kwargs = dict(bounds=[(None, None)] * system.dimension, method="highs")
    if len(A):
        kwargs.update(A_ub=-A, b_ub=-b)
    if len(E):
        kwargs.update(A_eq=E, b_eq=e)
    try:
        res = linprog(c, **kwargs)
    except ValueError:
        return None
    if res.status != 0:
        return None
    ge_idx = [i for i, r in enumerate(system.rows) if r.relation == GE]
    eq_idx = [i for i, r in enumerate(system.rows) if r.relation == EQ]
    dual = {}
    if len(A):
        for i, mval in zip(ge_idx, res.ineqlin.marginals):
            dual[i] = -float(mval)
    if len(E):
        for i, mval in zip(eq_idx, res.eqlin.marginals):
            dual[i] = float(mval)
    x = res.x
    slack = {}
    for i, row in enumerate(system.rows):
        slack[i] = abs(sum(float(cf) * x[k] for k, cf in enumerate(row.coeffs) if cf) - float(row.const))
    scored_support, scored_active = [], []
    for col, (i, sign) in enumerate(owner):
        y = dual.get(i, 0.0) * float(sign)
        if y > 1e-9:
            scored_support.append((-y, col))
        elif system.rows[i].relation == EQ and sign < 0:
            continue
        else:
            scored_active.append((slack[i], col))
    scored_support.sort()
    scored_active.sort()
    return [c for _, c in scored_support] + [c for _, c in scored_active]


def _feasible_point(system: RationalSystem):
    zero = (ZERO,) * system.dimension
    if system.contains(zero):
        return zero
    res = lp_minimize([ZERO] * system.dimension, system, hint=False)
    return res.x if res.status == OPTIMAL else None


def lp_minimize(objective: Sequence, system: RationalSystem, hint: bool = True) -> LpResult:
    """Minimise ``objective . x`` over ``system`` exactly.

    With ``hint=True`` a floating-point solve seeds the starting basis; the
    answer is the same either way.
    """
    objective = [as_fraction(v) for v in objective]
    if len(objective) != system.dimension:
        raise ValueError("objective length must equal system dimension")
    cols, h, g, owner = _dual_data(system, objective)
    sx = _Simplex(cols, h, g)
    candidates = _float_hint(system, objective, owner) if hint and cols else None
    status, data = sx.solve(candidates or ())
    warm = bool(candidates)
    if status == OPTIMAL:
        x = tuple(data)
        value = sum((c * v for c, v in zip(objective, x)), ZERO)
        duals = [ZERO] * len(system.rows)
        # recover row multipliers from the final basis
        for i, j in enumerate(sx.basis):
            if j < sx.n:
                idx, sign = owner[j]
                duals[idx] += sign * sx.w[i]
        return LpResult(OPTIMAL, value, x, tuple(duals), sx.pivots, warm)
    if status == UNBOUNDED:
        # dual unbounded: the primal is infeasible; the ray is a Farkas certificate
        farkas = [ZERO] * len(system.rows)
        for j, v in enumerate(data):
            if v:
                idx, sign = owner[j]
                farkas[idx] += sign * v
        return LpResult(INFEASIBLE, certificate=tuple(farkas), pivots=sx.pivots, warm_started=warm)
    # dual infeasible: the primal is unbounded or infeasible
    ray = tuple(data)
    point = _feasible_point(system)
    if point is None:
        res = lp_minimize([ZERO] * system.dimension, system, hint=False)
        return LpResult(INFEASIBLE, certificate=res.certificate, pivots=sx.pivots, warm_started=warm)
    return LpResult(UNBOUNDED, x=tuple(point), certificate=ray, pivots=sx.pivots, warm_started=warm)


def lp_maximize(objective: Sequence, system: RationalSystem, hint: bool = True) -> LpResult:
    res = lp_minimize([-as_fraction(v) for v in objective], system, hint)
    if res.status == OPTIMAL:
        res.value = -res.value
    return res


def _bounded_min(coeffs, const, system: RationalSystem, hint: bool) -> LpResult:
    """``min coeffs.x`` with the extra row ``coeffs.x >= const - 1``.

    The extra row keeps the LP bounded, which lets the float hint apply and
    still separates "implied" (value >= const) from "not implied".
    """
    cap = Row(tuple(coeffs), const - 1, GE)
    return lp_minimize(coeffs, system.with_rows(system.rows + (cap,)), hint)


def _is_feasible(system: RationalSystem) -> bool:
    return _feasible_point(system) is not None


def is_implied(row: Row, system: RationalSystem, hint: bool = True) -> bool:
    """True iff every point of ``system`` satisfies ``row`` (vacuously if empty)."""
    if row.dimension != system.dimension:
        raise ValueError("row and system dimensions differ")
    if row.is_trivial():
        ok = 0 >= row.const if row.relation == GE else row.const == 0
        return ok or not _is_feasible(system)
    res = _bounded_min(row.coeffs, row.const, system, hint)
    if res.status == INFEASIBLE:
        return not _is_feasible(system)
    if res.value < row.const:
        return False
    if row.relation == GE:
        return True
    neg = row.negated()
    res = _bounded_min(neg.coeffs, neg.const, system, hint)
    return res.status == OPTIMAL and res.value >= neg.const

"""Quantum-realisable triangle distributions and the three Tsallis triangle inequalities.

Wiring of the triangle used throughout: source ``A`` feeds ``Y`` and ``Z``,
``B`` feeds ``X`` and ``Z``, ``C`` feeds ``X`` and ``Y``.  A source state is a
bipartite density matrix over its two edge factors, ordered
``A: (A->Y, A->Z)``, ``B: (B->X, B->Z)``, ``C: (C->X, C->Y)``.  Measurements act
on ``X: (B, C)``, ``Y: (A, C)``, ``Z: (A, B)`` edge factors in that order.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .probability import JointDistribution, VariableSpec
from .quantum.states import _rng, random_povm, random_pure_state
from .tsallis import Q_ONE_TOL, integer_order

# -- strategies and the Born rule ----------------------------------------------------


@dataclass
class TriangleStrategy:
    rho_A: np.ndarray
    rho_B: np.ndarray
    rho_C: np.ndarray
    edge_dims: dict  # {"A": (d_AY, d_AZ), "B": (d_BX, d_BZ), "C": (d_CX, d_CY)}
    povm_X: list
    povm_Y: list
    povm_Z: list

    def __post_init__(self):
        for s in "ABC":
            d = int(np.prod(self.edge_dims[s]))
            if getattr(self, f"rho_{s}").shape != (d, d):
                raise ValueError(f"rho_{s} does not match edge dimensions {self.edge_dims[s]}")
        ed = self.edge_dims
        need = {"X": ed["B"][0] * ed["C"][0], "Y": ed["A"][0] * ed["C"][1], "Z": ed["A"][1] * ed["B"][1]}
        for node, d in need.items():
            povm = getattr(self, f"povm_{node}")
            for E in povm:
                if E.shape != (d, d):
                    raise ValueError(f"POVM at {node} must act on dimension {d}")
            if np.max(np.abs(sum(povm) - np.eye(d))) > 1e-9:
                raise ValueError(f"POVM at {node} is not complete")

    @property
    def dims(self) -> tuple:
        return len(self.povm_X), len(self.povm_Y), len(self.povm_Z)


def born_distribution(strategy: TriangleStrategy, names=("X", "Y", "Z")) -> JointDistribution:
    """``P(x,y,z) = Tr[(rho_A (x) rho_B (x) rho_C) (E_x (x) F_y (x) G_z)]`` with edge wiring."""
    s = strategy
    ay, az = s.edge_dims["A"]
    bx, bz = s.edge_dims["B"]
    cx, cy = s.edge_dims["C"]
    rA = s.rho_A.reshape(ay, az, ay, az)
    rB = s.rho_B.reshape(bx, bz, bx, bz)
    rC = s.rho_C.reshape(cx, cy, cx, cy)
    E = np.array(s.povm_X).reshape(-1, bx, cx, bx, cx)
    F = np.array(s.povm_Y).reshape(-1, ay, cy, ay, cy)
    G = np.array(s.povm_Z).reshape(-1, az, bz, az, bz)
    # lower-case letters index rows of the source states, upper-case their columns;
    # Tr(rho M) = sum rho[i, j] M[j, i] so each POVM is indexed (column, row)
    P = np.einsum("pqPQ,rsRS,tuTU,xRTrt,yPUpu,zQSqs->xyz", rA, rB, rC, E, F, G, optimize="greedy")
    P = np.real(P)
    P[np.abs(P) < 1e-15] = 0.0
    if P.min() < -1e-10:
        raise ValueError("Born rule produced a negative probability; check the strategy")
    P = np.clip(P, 0.0, None)
    P = P / P.sum()
    return JointDistribution([VariableSpec(n, d) for n, d in zip(names, P.shape)], P, tol=1e-9)


def _classical_correlated(d: int) -> np.ndarray:
    """``sum_k |kk><kk| / d``: a shared uniform classical value."""
    v = np.zeros((d * d, d * d))
    for k in range(d):
        v[k * d + k, k * d + k] = 1.0 / d
    return v


def _phi_plus() -> np.ndarray:
    v = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return np.outer(v, v.conj())


def _qubit_projector(theta: float, outcome: int) -> np.ndarray:
    """Projector for outcome of ``cos(theta) Z + sin(theta) X``."""
    obs = np.array([[math.cos(theta), math.sin(theta)], [math.sin(theta), -math.cos(theta)]])
    return (np.eye(2) + (-1) ** outcome * obs) / 2


def chained_angles(N: int) -> tuple:
    """Settings ``alpha_j = pi (2j-2)/(2N)`` and ``beta_j = pi (2j-1)/(2N)``, ``j = 1..N``."""
    alpha = [math.pi * (2 * j) / (2 * N) for j in range(N)]
    beta = [math.pi * (2 * j + 1) / (2 * N) for j in range(N)]
    return alpha, beta


def chained_bell_strategy(N: int) -> TriangleStrategy:
    """Settings travel on the classical sources ``A`` (Y's input) and ``B`` (X's input);
    ``C`` is a maximally entangled qubit pair; ``Z`` reads both settings."""
    if N < 2:
        raise ValueError("N must be at least 2")
    alpha, beta = chained_angles(N)
    cls = _classical_correlated(N)
    basis = np.eye(N)

    def proj(k):
        return np.outer(basis[k], basis[k])

    povm_X = [np.zeros((2 * N, 2 * N)) for _ in range(2 * N)]
    povm_Y = [np.zeros((2 * N, 2 * N)) for _ in range(2 * N)]
    for b in range(N):
        for xt in range(2):
            povm_X[xt * N + b] = np.kron(proj(b), _qubit_projector(alpha[b], xt))
    for a in range(N):
        for yt in range(2):
            povm_Y[yt * N + a] = np.kron(proj(a), _qubit_projector(beta[a], yt))
    povm_Z = [np.kron(proj(a), proj(b)) for a in range(N) for b in range(N)]
    return TriangleStrategy(cls, cls, _phi_plus(), {"A": (N, N), "B": (N, N), "C": (2, 2)},
                            povm_X, povm_Y, povm_Z)


def fritz_distribution() -> JointDistribution:
    """CHSH-optimal strategy embedded in the triangle, dims (4, 4, 4), via the Born rule."""
    return born_distribution(chained_bell_strategy(2))


def chained_bell_distribution(N: int) -> JointDistribution:
    """Closed form of the chained-Bell embedding: ``X = (x~, b)``, ``Y = (y~, a)``, ``Z = (a, b)``.

    Index layout ``P[x~ N + b, y~ N + a, a N + b]``, dims ``(2N, 2N, N^2)``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    alpha, beta = chained_angles(N)
    P = np.zeros((2 * N, 2 * N, N * N))
    for a in range(N):
        for b in range(N):
            c = math.cos(alpha[b] - beta[a])
            for xt in range(2):
                for yt in range(2):
                    P[xt * N + b, yt * N + a, a * N + b] = (1 + (-1) ** (xt ^ yt) * c) / (4 * N * N)
    return JointDistribution([VariableSpec("X", 2 * N), VariableSpec("Y", 2 * N), VariableSpec("Z", N * N)], P)


def correlator(dist: JointDistribution, N: int, b: int, a: int) -> float:
    """``E(x~ y~ | b, a)`` recovered from a chained-Bell layout distribution."""
    P = dist.table
    block = np.array([[P[xt * N + b, yt * N + a, a * N + b] for yt in range(2)] for xt in range(2)])
    block = block / block.sum()
    return float(block[0, 0] + block[1, 1] - block[0, 1] - block[1, 0])


def chained_bell_score(dist: JointDistribution, N: int) -> float:
    """``sum_j E(a_j, b_j) + sum_j E(a_{j+1}, b_j) - E(a_1, b_N)``; quantum optimum ``2N cos(pi/2N)``."""
    s = sum(correlator(dist, N, j, j) for j in range(N))
    s += sum(correlator(dist, N, j + 1, j) for j in range(N - 1))
    return s - correlator(dist, N, 0, N - 1)


def chsh_value(dist: JointDistribution) -> float:
    E = [[correlator(dist, 2, b, a) for a in range(2)] for b in range(2)]
    return abs(E[0][0] - E[0][1] + E[1][0] + E[1][1])


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def magic_square_observables() -> list:
    """Two-qubit Mermin-Peres table; rows multiply to +1, columns to -1."""
    k = np.kron
    P = _PAULI
    return [
        [k(P["X"], P["I"]), k(P["I"], P["X"]), k(P["X"], P["X"])],
        [k(P["I"], P["Z"]), k(P["Z"], P["I"]), k(P["Z"], P["Z"])],
        [-k(P["X"], P["Z"]), -k(P["Z"], P["X"]), k(P["Y"], P["Y"])],
    ]


def magic_square_distribution(return_win: bool = False):
    """Mermin-Peres strategy on two Bell pairs, dims (12, 12, 9).

    ``X = (row assignment (a1, a2), row)``, ``Y = (column assignment (b1, b2), column)``,
    ``Z = (column, row)``.  Index layout ``P[ia 3 + row, ib 3 + col, col 3 + row]``.
    The third entry of a row is ``a1 a2``, of a column ``-b1 b2``.
    """
    T = magic_square_observables()
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1 / math.sqrt(2)
    # |phi>_{a1 b1} |phi>_{a2 b2} reordered to (a1, a2, b1, b2)
    psi = np.einsum("ij,kl->ikjl", phi.reshape(2, 2), phi.reshape(2, 2)).reshape(16)
    rho = np.outer(psi, psi.conj())
    I4 = np.eye(4)

    def row_proj(r, a1, a2):
        return (I4 + a1 * T[r][0]) @ (I4 + a2 * T[r][1]) / 4

    def col_proj(c, b1, b2):
        return (I4 + b1 * T[0][c].T) @ (I4 + b2 * T[1][c].T) / 4

    signs = list(itertools.product((1, -1), repeat=2))
    P = np.zeros((12, 12, 9))
    win = 0.0
    for row in range(3):
        for col in range(3):
            for ia, (a1, a2) in enumerate(signs):
                for ib, (b1, b2) in enumerate(signs):
                    p = float(np.real(np.trace(rho @ np.kron(row_proj(row, a1, a2), col_proj(col, b1, b2))))) / 9
                    p = max(p, 0.0) if abs(p) > 1e-15 else 0.0
                    P[ia * 3 + row, ib * 3 + col, col * 3 + row] = p
                    if [a1, a2, a1 * a2][col] == [b1, b2, -b1 * b2][row]:
                        win += p
    P /= P.sum()
    dist = JointDistribution([VariableSpec("X", 12), VariableSpec("Y", 12), VariableSpec("Z", 9)], P)
    return (dist, win) if return_win else dist


def shared_copies_distribution(D: int, exact: bool = False) -> JointDistribution:
    """``X = (b, c)``, ``Y = (a, c)``, ``Z = (a, b)`` with ``a, b, c`` uniform on ``D`` values."""
    if D < 2:
        raise ValueError("D must be at least 2")
    size = D ** 6
    idx = [(b * D + c) * D ** 4 + (a * D + c) * D ** 2 + (a * D + b)
           for a in range(D) for b in range(D) for c in range(D)]
    variables = [VariableSpec("X", D * D), VariableSpec("Y", D * D), VariableSpec("Z", D * D)]
    if exact:
        vals = [Fraction(0)] * size
        for i in idx:
            vals[i] = Fraction(1, D ** 3)
        return JointDistribution.from_rational(variables, vals)
    P = np.zeros(size)
    P[idx] = 1.0 / D ** 3
    return JointDistribution(variables, P)


def random_strategy(edge_dim: int, outcome_dim: int, seed=None, classical: bool = False) -> TriangleStrategy:
    """Haar-random pure source states and random POVMs at every node.

    ``classical=True`` draws diagonal source states and diagonal POVMs instead,
    which makes the Born-rule distribution classically triangle-compatible.
    """
    rng = _rng(seed)
    d = edge_dim
    dims = {"A": (d, d), "B": (d, d), "C": (d, d)}
    if classical:
        states = [np.diag(rng.dirichlet(np.ones(d * d))) for _ in range(3)]
        povms = []
        for _ in range(3):
            w = rng.dirichlet(np.ones(outcome_dim), size=d * d)  # rows: basis states
            povms.append([np.diag(w[:, k]) for k in range(outcome_dim)])
        return TriangleStrategy(*states, dims, *povms)
    states = []
    for _ in range(3):
        v = random_pure_state(d * d, rng)
        states.append(np.outer(v, v.conj()))
    povms = [random_povm(d * d, outcome_dim, rng) for _ in range(3)]
    return TriangleStrategy(states[0], states[1], states[2], dims, *povms)


# -- bounds ------------------------------------------------------------------------------


def _powers(q, d_o, d_u):
    qi = integer_order(q)
    if qi is not None and isinstance(d_o, int) and isinstance(d_u, int):
        return Fraction(1, d_o ** (qi - 1)), Fraction(1, d_u ** (qi - 1)), qi - 1
    q = float(q)
    return float(d_o) ** (1.0 - q), float(d_u) ** (1.0 - q), q - 1.0


def _is_one(q) -> bool:
    return abs(float(q) - 1.0) < Q_ONE_TOL


def b1(q, d_o, d_u):
    if _is_one(q):
        return 0.0
    o, u, qm1 = _powers(q, d_o, d_u)
    return -(1 - o) * (2 - o - u) / qm1


def b21(q, d_o, d_u):
    if _is_one(q):
        return 0.0
    o, u, qm1 = _powers(q, d_o, d_u)
    return -(11 + u ** 3 + 6 * o ** 2 + 3 * o * u - 6 * u - 15 * o) / qm1


def b22(q, d_o, d_u):
    if _is_one(q):
        return 0.0
    o, u, qm1 = _powers(q, d_o, d_u)
    return -(10 + o * u ** 3 + 5 * o ** 2 + 2 * o * u - 5 * u - 13 * o) / qm1


def b3(q, d_o, d_u):
    if _is_one(q):
        return 0.0
    o, u, qm1 = _powers(q, d_o, d_u)
    return -(6 + o * u ** 2 + 3 * o ** 2 + o * u - 3 * u - 8 * o) / qm1


def b_bound(i: int, q, d_o, d_u):
    """Closed-form lower bound ``B_i``; ``B_2`` is the larger of ``B_21`` and ``B_22``."""
    if i == 1:
        return b1(q, d_o, d_u)
    if i == 2:
        return max(b21(q, d_o, d_u), b22(q, d_o, d_u))
    if i == 3:
        return b3(q, d_o, d_u)
    raise ValueError("i must be 1, 2 or 3")


def b_star_bound(i: int, q, d_o):
    """Dimension-free variant with ``d_u = d_o^3 - d_o``."""
    return b_bound(i, q, d_o, d_o ** 3 - d_o)


def _bound_vector(i: int, qs: np.ndarray, d_o: float, d_u: float) -> np.ndarray:
    return np.array([float(b_bound(i, float(q), float(d_o), float(d_u))) for q in qs])


# -- inequality left-hand sides -------------------------------------------------------

# roles (x, y, z) -> coefficients on subsets of roles
_PATTERNS = {
    1: {("x",): -1, ("y",): -1, ("z",): -1, ("x", "y"): 1, ("x", "z"): 1},
    2: {("x",): -5, ("y",): -5, ("z",): -5, ("x", "y"): 4, ("x", "z"): 4, ("y", "z"): 4, ("x", "y", "z"): -2},
    3: {("x",): -3, ("y",): -3, ("z",): -3, ("x", "y"): 2, ("x", "z"): 2, ("y", "z"): 3, ("x", "y", "z"): -1},
}


def permutations_for(i: int, names=("X", "Y", "Z")) -> list:
    """Distinct role assignments: three distinguished nodes for inequalities 1 and 3, one for the symmetric 2."""
    X, Y, Z = names
    if i == 2:
        return [(X, Y, Z)]
    return [(X, Y, Z), (Y, Z, X), (Z, X, Y)]


def lhs_coefficients(i: int, perm: Sequence[str]) -> dict:
    """``{frozenset(names): coefficient}`` for inequality ``i`` under role assignment ``perm``."""
    role = dict(zip("xyz", perm))
    return {frozenset(role[r] for r in sub): c for sub, c in _PATTERNS[i].items()}


def _dist_names(dist: JointDistribution) -> tuple:
    if len(dist.names) != 3:
        raise ValueError("the triangle inequalities need a distribution over exactly three variables")
    return dist.names


def _entropy_table(dist: JointDistribution, qs: np.ndarray) -> dict:
    names = _dist_names(dist)
    out = {}
    for k in (1, 2, 3):
        for sub in itertools.combinations(names, k):
            out[frozenset(sub)] = _kernels.tsallis_many(dist.marginal_probabilities(list(sub)), qs, Q_ONE_TOL)
    return out


def _lhs_from_table(table: dict, i: int, perm) -> np.ndarray:
    return sum(c * table[s] for s, c in lhs_coefficients(i, perm).items())


def inequality_lhs(i: int, dist: JointDistribution, q, permutation: Sequence[str] | None = None,
                   policy: str = "worst"):
    """Left-hand side of inequality ``i`` at order ``q``.

    With ``permutation`` given, that role assignment is used.  Otherwise
    ``policy`` chooses across assignments: ``"worst"`` (smallest value),
    ``"best"`` (largest) or ``"all"`` (dict per assignment).
    """
    names = _dist_names(dist)
    if permutation is not None:
        perms = [tuple(permutation)]
    else:
        perms = permutations_for(i, names)
    qi = integer_order(q)
    if qi is not None and dist.is_exact:
        from .tsallis import tsallis_entropy

        vals = {p: sum(c * tsallis_entropy(dist, sorted(s, key=names.index), qi)
                       for s, c in lhs_coefficients(i, p).items()) for p in perms}
    else:
        table = _entropy_table(dist, np.array([float(q)]))
        vals = {p: float(_lhs_from_table(table, i, p)[0]) for p in perms}
    if permutation is not None:
        return vals[perms[0]]
    if policy == "all":
        return vals
    if policy == "worst":
        return min(vals.values())
    if policy == "best":
        return max(vals.values())
    raise ValueError(f"unknown policy {policy!r}")


# -- scans -----------------------------------------------------------------------------


def default_q_grid(q_max: float = 100.0, points: int = 200) -> np.ndarray:
    """Geometric grid on ``[1, q_max]`` (``q = 1`` included)."""
    return np.geomspace(1.0, q_max, points)


@dataclass
class ScanReport:
    inequality: int
    d_o: float
    d_u: float
    q_grid: list
    margins: dict  # perm label -> list over q_grid
    worst: dict  # perm label -> (q, margin) after refinement
    refinement_shift: dict

    def min_margin(self, perms: Sequence[str] | None = None) -> float:
        keys = self.worst if perms is None else perms
        return min(self.worst[k][1] for k in keys)

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality, "d_o": self.d_o, "d_u": self.d_u,
            "q_grid": [float(f"{q:.12g}") for q in self.q_grid],
            "margins": {k: [float(f"{m:.12g}") for m in v] for k, v in self.margins.items()},
            "worst": {k: {"q": float(f"{q:.12g}"), "margin": float(f"{m:.12g}")} for k, (q, m) in self.worst.items()},
            "refinement_shift": {k: float(f"{v:.12g}") for k, v in self.refinement_shift.items()},
        }


def _perm_label(perm) -> str:
    return "".join(perm)


def _refine(dist, i, perm, d_o, d_u, qs, margins, k):
    """Golden-section search for the smallest margin near grid index ``k``."""
    lo = qs[max(k - 1, 0)]
    hi = qs[min(k + 1, len(qs) - 1)]
    if hi - lo < 1e-12:
        return float(qs[k]), float(margins[k])

    def f(q):
        table = _entropy_table(dist, np.array([q]))
        return float(_lhs_from_table(table, i, perm)[0]) - float(b_bound(i, q, float(d_o), float(d_u)))

    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if res.fun < margins[k]:
        return float(res.x), float(res.fun)
    return float(qs[k]), float(margins[k])


def violation_scan(dist: JointDistribution, i: int, q_grid=None, d_o=2, d_u=2, refine: bool = True,
                   _table=None) -> ScanReport:
    """Margins ``LHS - B_i(q, d_o, d_u)`` over a q grid for every role assignment."""
    qs = default_q_grid() if q_grid is None else np.asarray(q_grid, dtype=float)
    if qs.min() < 1:
        raise ValueError("q grid must lie in [1, inf)")
    table = _entropy_table(dist, qs) if _table is None else _table
    bound = _bound_vector(i, qs, d_o, d_u)
    margins, worst, shift = {}, {}, {}
    for perm in permutations_for(i, dist.names):
        m = _lhs_from_table(table, i, perm) - bound
        k = int(np.argmin(m))
        label = _perm_label(perm)
        margins[label] = m.tolist()
        if refine:
            worst[label] = _refine(dist, i, perm, d_o, d_u, qs, m, k)
        else:
            worst[label] = (float(qs[k]), float(m[k]))
        shift[label] = float(m[k]) - worst[label][1]
    return ScanReport(i, float(d_o), float(d_u), qs.tolist(), margins, worst, shift)


NO_VIOLATION_TOL = 1e-9


def table1_di(dist: JointDistribution, i: int, policy: str = "best", d_u: int = 2, q_grid=None,
              d_max: int = 200, details: bool = False):
    """Smallest ``d_o >= 2`` for which no violation of ``B_i(q, d_o, d_u)`` is seen.

    ``policy="best"``: a role assignment that is never violated suffices.
    ``policy="worst"``: every role assignment must be free of violations.
    """
    if policy not in ("best", "worst"):
        raise ValueError("policy must be 'best' or 'worst'")
    qs = default_q_grid() if q_grid is None else np.asarray(q_grid, dtype=float)
    table = _entropy_table(dist, qs)
    per_perm = {}
    for d_o in range(2, d_max + 1):
        rep = violation_scan(dist, i, qs, d_o, d_u, refine=True, _table=table)
        ok = {k: m >= -NO_VIOLATION_TOL for k, (_, m) in rep.worst.items()}
        for k, good in ok.items():
            if good and k not in per_perm:
                per_perm[k] = d_o
        done = any(ok.values()) if policy == "best" else all(ok.values())
        if done:
            return (d_o, per_perm) if details else d_o
    raise RuntimeError(f"no non-violating d_o up to {d_max}")


TABLE1_SCENARIOS = tuple([f"N={n}" for n in range(2, 11)] + ["Magic Sq."])


def scenario_distribution(name: str) -> JointDistribution:
    """Named distributions: ``N=<n>``, ``chained-<n>``, ``fritz``, ``magic``, ``shared-<D>``."""
    if name.startswith("chained-"):
        return chained_bell_distribution(int(name[8:]))
    if name.startswith("shared-"):
        return shared_copies_distribution(int(name[7:]))
    if name.startswith("N="):
        return chained_bell_distribution(int(name[2:]))
    if name.lower().startswith("magic"):
        return magic_square_distribution()
    if name.lower() == "fritz":
        return fritz_distribution()
    raise KeyError(f"unknown scenario {name!r}")


def _table1_row(args) -> dict:
    name, policy, q_grid = args
    dist = scenario_distribution(name)
    ds = [table1_di(dist, i, policy=policy, q_grid=q_grid) for i in (1, 2, 3)]
    return {"scenario": name, "d1": ds[0], "d2": ds[1], "d3": ds[2], "smallest_observed_dim": min(dist.shape)}


def table1_rows(scenarios: Sequence[str] = TABLE1_SCENARIOS, policy: str = "best", q_grid=None,
                workers: int = 1) -> list:
    jobs = [(name, policy, q_grid) for name in scenarios]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_table1_row, jobs))
    return [_table1_row(j) for j in jobs]


def table1_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "d1", "d2", "d3", "smallest_observed_dim"])
    for r in rows:
        w.writerow([r["scenario"], r["d1"], r["d2"], r["d3"], r["smallest_observed_dim"]])
    return buf.getvalue()


# -- random search ------------------------------------------------------------------------


@dataclass
class SearchReport:
    edge_dim: int
    outcome_dim: int
    samples: int
    min_margin: float
    worst_sample: dict
    violators: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return bool(self.violators)

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class UniformQ:
    """Draws ``q`` uniformly from ``[lo, hi]``."""

    lo: float = 1.0
    hi: float = 100.0

    def __call__(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))


def _search_one(args):
    from .quantum.states import matrix_to_pairs

    index, child, edge_dim, outcome_dim, q_sampler, q_per_sample, d_u, classical, tol = args
    rng = np.random.default_rng(child)
    strat = random_strategy(edge_dim, outcome_dim, rng, classical=classical)
    dist = born_distribution(strat)
    qs = np.array([q_sampler(rng) for _ in range(q_per_sample)])
    table = _entropy_table(dist, qs)
    best, violators = None, []
    for i in (1, 2, 3):
        bound = _bound_vector(i, qs, outcome_dim, d_u)
        for perm in permutations_for(i, dist.names):
            m = _lhs_from_table(table, i, perm) - bound
            k = int(np.argmin(m))
            rec = {"sample": index, "inequality": i, "permutation": _perm_label(perm),
                   "q": float(qs[k]), "margin": float(m[k])}
            if best is None or rec["margin"] < best["margin"]:
                best = rec
            if m[k] < -tol:
                violators.append(dict(rec, strategy={
                    "rho": [matrix_to_pairs(getattr(strat, f"rho_{x}")) for x in "ABC"],
                    "povms": [[matrix_to_pairs(E) for E in getattr(strat, f"povm_{x}")] for x in "XYZ"],
                }))
    return best, violators


def random_violation_search(edge_dim: int, outcome_dim: int, q_sampler: Callable | None = None,
                            samples: int = 100, seed=None, q_per_sample: int = 4, d_u: int = 2,
                            classical: bool = False, tol: float = NO_VIOLATION_TOL,
                            workers: int = 1) -> SearchReport:
    """Random triangle strategies checked against ``B_i(q, outcome_dim, d_u)`` for all 7 forms.

    Every sample gets its own spawned seed, so the report does not depend on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    q_sampler = q_sampler or UniformQ()
    children = np.random.SeedSequence(seed).spawn(samples)
    jobs = [(k, c, edge_dim, outcome_dim, q_sampler, q_per_sample, d_u, classical, tol)
            for k, c in enumerate(children)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_search_one, jobs, chunksize=max(1, samples // (4 * workers))))
    else:
        results = [_search_one(j) for j in jobs]
    best = min((r[0] for r in results), key=lambda r: r["margin"])
    violators = [v for r in results for v in r[1]]
    return SearchReport(edge_dim, outcome_dim, samples, best["margin"], best, violators)

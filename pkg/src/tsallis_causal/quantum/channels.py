"""Choi states of common-cause channels and numerical checks of their Tsallis bounds.

A staged channel maps an input ``C`` to ``A (x) A'' (x) B (x) B''`` by

1. a unitary ``U'`` from ``C`` onto ``A' (x) B'``,
2. local unitaries ``U_A`` on ``E_A (x) A'`` and ``U_B`` on ``B' (x) E_B`` with
   ancillas ``E_A``, ``E_B`` prepared in pure states,
3. optional discarding of ``A''`` and/or ``B''``.

Before any discarding the normalised Choi state ``tau`` is pure, so all
reduced states are computed from a single state vector.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .._kernels import tsallis_many
from ..tsallis import Q_ONE_TOL, bound_f
from .states import (DensityOperator, _rng, haar_random_unitary, matrix_to_pairs, partial_trace,
                     pure_state_marginal, quantum_cmi, quantum_tsallis, random_pure_state)

UNITARY_TOL = 1e-10
MAX_TOTAL_DIM = 256
SUBSYSTEM_LABELS = ("A", "A''", "B", "B''")


def _check_unitary(U: np.ndarray, name: str) -> None:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"{name} must be square")
    if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > UNITARY_TOL:
        raise ValueError(f"{name} is not unitary")


@dataclass
class StagedChannel:
    U_prime: np.ndarray
    dims_prime: tuple  # (d_A', d_B')
    U_A: np.ndarray | None = None
    U_B: np.ndarray | None = None
    phi: np.ndarray | None = None  # ancilla E_A
    psi: np.ndarray | None = None  # ancilla E_B
    split_A: tuple | None = None  # (d_A, d_A'')
    split_B: tuple | None = None  # (d_B, d_B'')
    traced: frozenset = frozenset()

    def __post_init__(self):
        self.U_prime = np.asarray(self.U_prime, dtype=complex)
        _check_unitary(self.U_prime, "U'")
        da, db = (int(d) for d in self.dims_prime)
        self.dims_prime = (da, db)
        if da * db != self.U_prime.shape[0]:
            raise ValueError("U' output does not factor as d_A' x d_B'")
        self.phi = np.ones(1, complex) if self.phi is None else np.asarray(self.phi, complex).ravel()
        self.psi = np.ones(1, complex) if self.psi is None else np.asarray(self.psi, complex).ravel()
        for name, v in (("phi", self.phi), ("psi", self.psi)):
            if abs(np.linalg.norm(v) - 1.0) > UNITARY_TOL:
                raise ValueError(f"ancilla state {name} is not normalised")
        na, nb = len(self.phi) * da, db * len(self.psi)
        self.U_A = np.eye(na, dtype=complex) if self.U_A is None else np.asarray(self.U_A, complex)
        self.U_B = np.eye(nb, dtype=complex) if self.U_B is None else np.asarray(self.U_B, complex)
        _check_unitary(self.U_A, "U_A")
        _check_unitary(self.U_B, "U_B")
        if self.U_A.shape[0] != na or self.U_B.shape[0] != nb:
            raise ValueError("local unitary dimensions do not match ancilla and primed systems")
        self.split_A = (na, 1) if self.split_A is None else tuple(int(d) for d in self.split_A)
        self.split_B = (nb, 1) if self.split_B is None else tuple(int(d) for d in self.split_B)
        if self.split_A[0] * self.split_A[1] != na or self.split_B[0] * self.split_B[1] != nb:
            raise ValueError("output splits do not match local dimensions")
        self.traced = frozenset(self.traced)
        if not self.traced <= {"A''", "B''"}:
            raise ValueError("only A'' and B'' can be traced out")

    @property
    def input_dim(self) -> int:
        return self.U_prime.shape[1]

    @property
    def output_dims(self) -> tuple:
        """Dimensions of ``A, A'', B, B''`` before discarding."""
        return self.split_A + self.split_B

    def isometry(self) -> np.ndarray:
        """``V = (U_A (x) U_B)(phi (x) U' (x) psi)`` as a (d_out x d_C) matrix."""
        pre = np.kron(np.kron(self.phi.reshape(-1, 1), self.U_prime), self.psi.reshape(-1, 1))
        return np.kron(self.U_A, self.U_B) @ pre

    def tau_vector(self) -> np.ndarray:
        """Purification of ``tau`` over ``A, A'', B, B'', C*``."""
        return (self.isometry() / np.sqrt(self.input_dim)).ravel()

    def kept_labels(self) -> tuple:
        return tuple(l for l in SUBSYSTEM_LABELS if l not in self.traced) + ("C*",)

    def kraus(self) -> list:
        V = self.isometry()
        dims = self.output_dims
        t = V.reshape(dims + (self.input_dim,))
        traced_idx = [SUBSYSTEM_LABELS.index(l) for l in SUBSYSTEM_LABELS if l in self.traced]
        kept_idx = [i for i in range(4) if i not in traced_idx]
        t = np.transpose(t, traced_idx + kept_idx + [4])
        dt = int(np.prod([dims[i] for i in traced_idx])) if traced_idx else 1
        dk = int(np.prod([dims[i] for i in kept_idx]))
        t = t.reshape(dt, dk, self.input_dim)
        return [t[k] for k in range(dt)]

    def kept_dims(self) -> tuple:
        dims = dict(zip(SUBSYSTEM_LABELS, self.output_dims))
        return tuple(dims[l] for l in SUBSYSTEM_LABELS if l not in self.traced)

    def to_dict(self) -> dict:
        return {
            "U_prime": matrix_to_pairs(self.U_prime),
            "dims_prime": list(self.dims_prime),
            "U_A": matrix_to_pairs(self.U_A),
            "U_B": matrix_to_pairs(self.U_B),
            "phi": matrix_to_pairs(self.phi.reshape(1, -1))[0],
            "psi": matrix_to_pairs(self.psi.reshape(1, -1))[0],
            "split_A": list(self.split_A),
            "split_B": list(self.split_B),
            "traced": sorted(self.traced),
        }


@dataclass
class KrausChannel:
    kraus: list
    input_dim: int
    output_dims: tuple

    def __post_init__(self):
        s = sum(k.conj().T @ k for k in self.kraus)
        if np.max(np.abs(s - np.eye(self.input_dim))) > 1e-9:
            raise ValueError("Kraus operators are not trace preserving")


@dataclass
class ChoiState:
    operator: np.ndarray
    input_dim: int
    output_dims: tuple

    def input_marginal(self) -> np.ndarray:
        d_out = int(np.prod(self.output_dims))
        t = self.operator.reshape(d_out, self.input_dim, d_out, self.input_dim)
        return np.einsum("aiaj->ij", t)


def _as_kraus(channel):
    if isinstance(channel, StagedChannel):
        return channel.kraus(), channel.input_dim, channel.kept_dims()
    if isinstance(channel, KrausChannel):
        return channel.kraus, channel.input_dim, tuple(channel.output_dims)
    raise TypeError("expected a StagedChannel or KrausChannel")


def choi_state(channel) -> ChoiState:
    """``sum_ij E(|i><j|) (x) |i><j|`` with the input copy last."""
    kraus, d_in, out_dims = _as_kraus(channel)
    d_out = int(np.prod(out_dims))
    op = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for K in kraus:
        # vec of K with input index last: sum_i K|i> (x) |i>
        v = K.reshape(-1)
        op += np.outer(v, v.conj())
    return ChoiState(op, d_in, tuple(out_dims))


def tau_state(channel) -> DensityOperator:
    """Trace-normalised Choi state over the kept outputs and ``C*``."""
    ch = choi_state(channel)
    return DensityOperator(ch.operator / ch.input_dim, ch.output_dims + (ch.input_dim,))


def _groups(channel: StagedChannel):
    labels = channel.kept_labels()
    A = [i for i, l in enumerate(labels) if l in ("A", "A''")]
    B = [i for i, l in enumerate(labels) if l in ("B", "B''")]
    return A, B, [len(labels) - 1]


def _tau_eigs(channel: StagedChannel, groups: Sequence[Sequence[int]]) -> list:
    """Eigenvalues of reduced ``tau`` on each group, computed from the purification."""
    dims = channel.output_dims + (channel.input_dim,)
    vec = channel.tau_vector()
    kept = [SUBSYSTEM_LABELS.index(l) for l in channel.kept_labels()[:-1]] + [4]
    out = []
    for g in groups:
        if not g:
            out.append(np.array([1.0]))
            continue
        full = [kept[i] for i in g]
        rho = pure_state_marginal(vec, dims, full)
        out.append(np.clip(np.linalg.eigvalsh(rho.matrix), 0.0, None))
    return out


def _cmi_from_eigs(eigs, qs) -> np.ndarray:
    ac, bc, abc, c = (tsallis_many(e[e > 0], qs, Q_ONE_TOL) for e in eigs)
    return ac + bc - abc - c


def staged_cmi(channel: StagedChannel, q, A=None, B=None) -> float:
    """``I_q(A:B|C*)`` of ``tau`` for the given kept-subsystem groups."""
    gA, gB, gC = _groups(channel)
    A = gA if A is None else list(A)
    B = gB if B is None else list(B)
    eigs = _tau_eigs(channel, [A + gC, B + gC, A + B + gC, gC])
    return float(_cmi_from_eigs(eigs, np.array([float(q)]))[0])


@dataclass
class Check:
    value: float
    bound: float
    margin: float  # bound - value
    details: dict = field(default_factory=dict)

    @property
    def deviation(self) -> float:
        return abs(self.margin)

    def to_dict(self) -> dict:
        return {"value": self.value, "bound": self.bound, "margin": self.margin, **self.details}


def verify_stage1(U_prime, q, dims_prime: Sequence[int] | None = None) -> Check:
    """``I_q(A':B'|C*)`` of a unitary channel against ``f(q, d_A', d_B')``."""
    U = np.asarray(U_prime, complex)
    _check_unitary(U, "U'")
    if dims_prime is None:
        d = U.shape[0]
        a = int(round(np.sqrt(d)))
        if a * a != d:
            raise ValueError("pass dims_prime for non-square output dimensions")
        dims_prime = (a, a)
    ch = StagedChannel(U, tuple(dims_prime))
    val = staged_cmi(ch, q)
    f = float(bound_f(float(q), *ch.dims_prime))
    return Check(val, f, f - val)


def verify_stage2(channel: StagedChannel, q) -> Check:
    """Local isometries leave the conditional mutual information at ``f(q, d_A', d_B')``."""
    if channel.traced:
        raise ValueError("stage II channels discard nothing")
    val = staged_cmi(channel, q)
    f = float(bound_f(float(q), *channel.dims_prime))
    return Check(val, f, f - val)


def verify_stage3_onesided(channel: StagedChannel, q) -> Check:
    """``I_q(AA'':B|C*) <= f(q, d_A', d_B')`` when only ``B''`` is discarded."""
    if float(q) < 1:
        raise ValueError("the one-sided bound is established for q >= 1 only")
    if channel.traced != frozenset({"B''"}):
        raise ValueError("stage III (one-sided) channels discard exactly B''")
    val = staged_cmi(channel, q)
    f = float(bound_f(float(q), *channel.dims_prime))
    return Check(val, f, f - val)


def random_staged_channel(dims_prime, d_EA: int = 1, d_EB: int = 1, split_A=None, split_B=None,
                          traced=(), seed=None) -> StagedChannel:
    rng = _rng(seed)
    da, db = dims_prime
    return StagedChannel(
        haar_random_unitary(da * db, rng), (da, db),
        U_A=haar_random_unitary(d_EA * da, rng), U_B=haar_random_unitary(db * d_EB, rng),
        phi=random_pure_state(d_EA, rng), psi=random_pure_state(d_EB, rng),
        split_A=split_A, split_B=split_B, traced=frozenset(traced))


def _divisor_splits(n: int, rng) -> tuple:
    opts = [(d, n // d) for d in range(2, n + 1) if n % d == 0]
    return opts[rng.integers(len(opts))]


@dataclass
class ConjectureReport:
    which: str
    samples: int
    q_grid: list
    max_margin: float
    mean_margin: float
    min_margin: float
    counterexamples: list
    tolerance: float
    max_margin_above_one: float = float("nan")  # both sides vanish at q = 1

    @property
    def found(self) -> bool:
        return bool(self.counterexamples)

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def search_conjecture_counterexamples(which: str = "conj1", max_dim: int = 3, q_range=(1.0, 10.0),
                                      samples: int = 500, seed=None, n_q: int = 25,
                                      tol: float = 1e-9) -> ConjectureReport:
    """Sample Haar staged channels with both ``A''`` and ``B''`` discarded.

    ``margin = I_q(A:B|C*) - bound`` with bound ``f(q, d_A', d_B')`` (conj1)
    or ``f(q, d_A, d_B)`` (conj2).  A margin above ``tol`` is recorded with
    the full channel data.
    """
    if which not in ("conj1", "conj2"):
        raise ValueError("which must be 'conj1' or 'conj2'")
    lo, hi = float(q_range[0]), float(q_range[1])
    if lo < 1:
        raise ValueError("q range must lie in [1, inf)")
    rng = _rng(seed)
    qs = np.unique(np.concatenate([[lo], np.geomspace(lo, hi, n_q)]))
    margins, above, found = [], [], []
    above_one = qs > 1.0 + Q_ONE_TOL
    drawn = 0
    while drawn < samples:
        da, db = (int(rng.integers(2, max_dim + 1)) for _ in range(2))
        ea, eb = (int(rng.integers(1, max_dim + 1)) for _ in range(2))
        split_A = _divisor_splits(ea * da, rng)
        split_B = _divisor_splits(db * eb, rng)
        if ea * da * db * eb * da * db > MAX_TOTAL_DIM:
            continue
        ch = random_staged_channel((da, db), ea, eb, split_A, split_B, ("A''", "B''"), rng)
        drawn += 1
        eigs = _tau_eigs(ch, [[0, 2], [1, 2], [0, 1, 2], [2]])
        cmi = _cmi_from_eigs(eigs, qs)
        dx, dy = (da, db) if which == "conj1" else (split_A[0], split_B[0])
        bound = np.array([float(bound_f(float(q), dx, dy)) for q in qs])
        m = cmi - bound
        k = int(np.argmax(m))
        margins.append(float(m[k]))
        if above_one.any():
            above.append(float(m[above_one].max()))
        if m[k] > tol:
            found.append({"q": float(qs[k]), "dims": {"A'": da, "B'": db, "E_A": ea, "E_B": eb,
                                                       "A": split_A[0], "A''": split_A[1],
                                                       "B": split_B[0], "B''": split_B[1]},
                          "margin": float(m[k]), "channel": ch.to_dict()})
    arr = np.array(margins)
    return ConjectureReport(which, samples, [float(q) for q in qs], float(arr.max()), float(arr.mean()),
                            float(arr.min()), found, tol, max(above) if above else float("nan"))


def cq_state(p_c: Sequence[float], states_A: Sequence[np.ndarray], states_B: Sequence[np.ndarray]) -> DensityOperator:
    """``sum_c p_c rho_A^c (x) rho_B^c (x) |c><c|``."""
    p = np.asarray(p_c, dtype=float)
    dA, dB, dC = states_A[0].shape[0], states_B[0].shape[0], len(p)
    t = np.zeros((dA * dB, dC, dA * dB, dC), dtype=complex)
    for c in range(dC):
        t[:, c, :, c] = p[c] * np.kron(states_A[c], states_B[c])
    d = dA * dB * dC
    return DensityOperator(t.reshape(d, d), (dA, dB, dC))


def verify_cq_theorem(p_c, states_A, states_B, q, tol: float = 1e-9) -> Check:
    """Classical-quantum bound ``I_q(A:B|C) <= f(q, d_A, d_B)`` with the conditional-entropy cross-check."""
    if float(q) < 1:
        raise ValueError("the classical-quantum bound needs q >= 1")
    rho = cq_state(p_c, states_A, states_B)
    dA, dB, _ = rho.dims
    val = quantum_cmi(rho, [0], [1], [2], q)
    f = float(bound_f(float(q), dA, dB))
    p = np.asarray(p_c, dtype=float)
    # S_q(AC) = sum_c p_c^q S_q(rho_A^c) + S_q(C)
    s_c = float(tsallis_many(p[p > 0], np.array([float(q)]), Q_ONE_TOL)[0])
    if abs(float(q) - 1.0) < Q_ONE_TOL:
        weights = p
    else:
        weights = p ** float(q)
    pred = sum(w * quantum_tsallis(DensityOperator(sA, validate=False), q)
               for w, sA, pc in zip(weights, states_A, p) if pc > 0) + s_c
    direct = quantum_tsallis(partial_trace(rho, [0, 2]), q)
    margin = f - val
    return Check(val, f, margin, {"cq_identity_deviation": abs(pred - direct), "saturated": abs(margin) <= tol})


def verify_sigma_lemma(sigma_C: DensityOperator, channel, q, tol: float = 1e-9) -> Check:
    """``I_q(A:B|CC*)`` on ``sigma_C (x) tau`` equals ``Tr(sigma^q) I_q(A:B|C*)_tau``.

    ``value`` is the left side, ``bound`` the unconditioned-on-``C`` quantity
    ``I_q(A:B|C*)_tau``; ``details`` records the multiplicative identity.
    """
    if float(q) < 1:
        raise ValueError("q must be at least 1")
    tau = tau_state(channel)
    if isinstance(channel, StagedChannel):
        A, B, _ = _groups(channel)
    else:
        A, B = [0], [1]
    n = len(tau.dims)
    if sigma_C.matrix.shape[0] != tau.dims[-1]:
        raise ValueError("sigma_C must live on the channel input")
    big = sigma_C.tensor(tau)
    shift = lambda g: [i + 1 for i in g]  # noqa: E731
    lhs = quantum_cmi(big, shift(A), shift(B), [0, n], q)
    cmi_tau = quantum_cmi(tau, A, B, [n - 1], q)
    ev = sigma_C.eigenvalues()
    tr_q = float(np.sum(ev[ev > 0] ** float(q)))
    rhs = tr_q * cmi_tau
    return Check(lhs, cmi_tau, cmi_tau - lhs,
                 {"rhs": rhs, "trace_sigma_q": tr_q, "identity_deviation": abs(lhs - rhs),
                  "identity_ok": abs(lhs - rhs) <= tol, "bound_ok": lhs <= cmi_tau + tol})


def search_mixed_ssa_violation(dims=(2, 2, 2), qs=(1.5, 2.0, 3.0, 5.0), samples: int = 2000, seed=None,
                               rank: int | None = None):
    """Random mixed states with ``I_q(A:B|C) < 0`` at some ``q > 1`` (first hit returned)."""
    from .states import random_density_operator

    rng = _rng(seed)
    best = None
    for k in range(samples):
        r = rank if rank is not None else int(rng.integers(1, int(np.prod(dims)) + 1))
        rho = random_density_operator(dims, r, rng)
        for q in qs:
            v = quantum_cmi(rho, [0], [1], [2], q)
            if best is None or v < best[0]:
                best = (v, q, rho)
            if v < -1e-6:
                return {"cmi": v, "q": q, "sample": k, "state": rho}
    return {"cmi": best[0], "q": best[1], "sample": None, "state": best[2]}

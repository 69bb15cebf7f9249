"""Density operators, partial traces and quantum Tsallis entropies."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .._kernels import tsallis_many
from ..tsallis import Q_ONE_TOL

HERMITIAN_TOL = 1e-10
EIGEN_TOL = 1e-10
TRACE_TOL = 1e-10


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


class DensityOperator:
    """Hermitian, positive, unit-trace matrix on a tensor product of subsystems."""

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims: Sequence[int] | None = None, validate: bool = True):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density operator must be a square matrix")
        dims = (m.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(f"dims {dims} do not multiply to {m.shape[0]}")
        if validate:
            if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise ValueError("matrix is not Hermitian")
            if abs(np.trace(m).real - 1.0) > TRACE_TOL:
                raise ValueError(f"trace is {np.trace(m).real}, not 1")
            if np.linalg.eigvalsh(m).min() < -EIGEN_TOL:
                raise ValueError("matrix has a negative eigenvalue")
        self.matrix = m
        self.dims = dims

    @classmethod
    def from_pure(cls, psi, dims: Sequence[int] | None = None) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int] | int) -> "DensityOperator":
        dims = (dims,) if isinstance(dims, int) else tuple(dims)
        d = int(np.prod(dims))
        return cls(np.eye(d) / d, dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues with tiny negative round-off clipped to zero."""
        ev = np.linalg.eigvalsh(self.matrix)
        if ev.min() < -EIGEN_TOL:
            raise ValueError(f"eigenvalue {ev.min()} below tolerance")
        return np.clip(ev, 0.0, None)

    def ptrace(self, keep: Sequence[int]) -> "DensityOperator":
        return partial_trace(self, keep)

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        return DensityOperator(np.kron(self.matrix, other.matrix), self.dims + other.dims, validate=False)

    def __repr__(self) -> str:
        return f"DensityOperator(dims={self.dims})"


def partial_trace(rho: DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Reduced state on subsystems ``keep`` (returned in ascending index order)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.dims)
    if not keep:
        raise ValueError("keep must be non-empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"subsystem indices {keep} out of range for {n} subsystems")
    if len(keep) == n:
        return rho
    t = rho.matrix.reshape(rho.dims + rho.dims)
    traced = [i for i in range(n) if i not in keep]
    # einsum: shared labels for traced axes sum them out
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[i] for i in range(n)]
    col = [letters[i] if i in traced else letters[n + i] for i in range(n)]
    out = [letters[i] for i in keep] + [letters[n + i] for i in keep]
    red = np.einsum("".join(row) + "".join(col) + "->" + "".join(out), t)
    kd = tuple(rho.dims[i] for i in keep)
    d = int(np.prod(kd))
    return DensityOperator(red.reshape(d, d), kd, validate=False)


def pure_state_marginal(psi, dims: Sequence[int], keep: Sequence[int]) -> DensityOperator:
    """Reduced state of a pure vector without forming the full projector."""
    dims = tuple(dims)
    keep = sorted(set(keep))
    rest = [i for i in range(len(dims)) if i not in keep]
    t = np.asarray(psi, dtype=complex).reshape(dims)
    t = np.transpose(t, keep + rest)
    dk = int(np.prod([dims[i] for i in keep]))
    m = t.reshape(dk, -1)
    return DensityOperator(m @ m.conj().T, tuple(dims[i] for i in keep), validate=False)


def entropy_from_eigenvalues(ev, q) -> float:
    ev = np.asarray(ev, dtype=float)
    return float(tsallis_many(ev[ev > 0], np.array([float(q)]), Q_ONE_TOL)[0])


def quantum_tsallis(rho: DensityOperator, q) -> float:
    """``S_q(rho) = (1 - Tr rho^q) / (q - 1)``; von Neumann entropy (nats) at ``q = 1``."""
    if not float(q) > 0:
        raise ValueError("q must be positive")
    return entropy_from_eigenvalues(rho.eigenvalues(), q)


def _group_entropy(rho: DensityOperator, group: Sequence[int], q) -> float:
    if not group:
        return 0.0
    return quantum_tsallis(partial_trace(rho, group), q)


def quantum_cmi(rho: DensityOperator, A: Sequence[int], B: Sequence[int], C: Sequence[int] = (), q=1.0) -> float:
    """``I_q(A:B|C) = S(AC) + S(BC) - S(ABC) - S(C)`` for groups of subsystem indices."""
    A, B, C = list(A), list(B), list(C)
    if not A or not B:
        raise ValueError("A and B must be non-empty")
    if set(A) & set(B) or set(A) & set(C) or set(B) & set(C):
        raise ValueError("subsystem groups must be disjoint")
    return (_group_entropy(rho, A + C, q) + _group_entropy(rho, B + C, q)
            - _group_entropy(rho, A + B + C, q) - _group_entropy(rho, C, q))


def quantum_mi(rho: DensityOperator, A: Sequence[int], B: Sequence[int], q=1.0) -> float:
    return quantum_cmi(rho, A, B, (), q)


# -- random objects -------------------------------------------------------------

def haar_random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary (QR with phase correction, via scipy)."""
    rng = _rng(seed)
    if dim < 1:
        raise ValueError("dim must be positive")
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def random_pure_state(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density_operator(dims: Sequence[int], rank: int | None = None, seed=None) -> DensityOperator:
    """Mixed state from a Ginibre matrix of the given rank (full rank by default)."""
    rng = _rng(seed)
    dims = tuple(dims)
    d = int(np.prod(dims))
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real, dims)


def _inv_sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v / np.sqrt(w)) @ v.conj().T


def random_povm(dim: int, outcomes: int, seed=None) -> list:
    """Random POVM; rank-one projectors in a Haar basis when ``outcomes == dim``."""
    rng = _rng(seed)
    if outcomes < 1:
        raise ValueError("need at least one outcome")
    if outcomes == dim:
        U = haar_random_unitary(dim, rng)
        return [np.outer(U[:, k], U[:, k].conj()) for k in range(dim)]
    G = []
    for _ in range(outcomes):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        G.append(a @ a.conj().T)
    S = _inv_sqrt_psd(sum(G))
    return [S @ g @ S for g in G]


def is_povm(elements, tol: float = 1e-10) -> bool:
    d = elements[0].shape[0]
    if np.max(np.abs(sum(elements) - np.eye(d))) > tol:
        return False
    return all(np.linalg.eigvalsh((e + e.conj().T) / 2).min() >= -tol for e in elements)


def matrix_to_pairs(m: np.ndarray) -> list:
    """Row-major ``[re, im]`` pairs for JSON."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)]


def pairs_to_matrix(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def max_entangled(d: int) -> np.ndarray:
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / math.sqrt(d)
    return v

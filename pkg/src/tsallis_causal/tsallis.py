"""Classical Tsallis entropies and the derived information quantities.

All functions accept a :class:`JointDistribution` and variable-name subsets.
When the distribution carries an exact table and ``q`` is an integer >= 2 the
result is an exact ``Fraction``; otherwise it is a float.  ``q`` within 1e-9
of 1 selects the Shannon (natural-log) branch.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .probability import JointDistribution

Q_ONE_TOL = 1e-9


def _is_shannon(q) -> bool:
    return abs(float(q) - 1.0) < Q_ONE_TOL


def integer_order(q) -> int | None:
    """``q`` as an int when it is an integer >= 2, else None."""
    if isinstance(q, bool):
        return None
    if isinstance(q, (int, np.integer)):
        return int(q) if q >= 2 else None
    if isinstance(q, Fraction):
        return int(q) if q.denominator == 1 and q >= 2 else None
    if isinstance(q, float) and q.is_integer() and q >= 2:
        return int(q)
    return None


def _check_q(q) -> None:
    if not float(q) > 0:
        raise ValueError(f"entropy order must be positive, got {q}")


def q_log(x, q):
    """q-logarithm ``(x^(1-q) - 1) / (1 - q)``; natural log at ``q = 1``."""
    if x <= 0:
        raise ValueError("q_log needs x > 0")
    if _is_shannon(q):
        return math.log(x)
    qi = integer_order(q)
    if qi is not None and isinstance(x, (Fraction, int)):
        return (Fraction(x) ** (1 - qi) - 1) / (1 - qi)
    q = float(q)
    return math.expm1((1.0 - q) * math.log(x)) / (1.0 - q)


def _names(subset) -> list:
    if isinstance(subset, str):
        return [subset]
    return list(subset)


def _exact_mode(dist: JointDistribution, q) -> int | None:
    return integer_order(q) if dist.is_exact else None


def _entropy_of_table(p, q):
    """Entropy of a flat probability vector (float path)."""
    if _is_shannon(q):
        return _kernels.shannon_sum(p)
    return float(_kernels.tsallis_many(p, np.array([float(q)]), Q_ONE_TOL)[0])


def _exact_entropy_of_table(values, qi: int) -> Fraction:
    return (1 - sum((v ** qi for v in values if v), Fraction(0))) / (qi - 1)


def tsallis_entropy(dist: JointDistribution, subset, q):
    """``S_q`` of the marginal over ``subset``; zero-probability cells are skipped."""
    names = _names(subset)
    if not names:
        raise ValueError("subset must be non-empty")
    _check_q(q)
    qi = _exact_mode(dist, q)
    if qi is not None:
        return _exact_entropy_of_table(np.asarray(dist.marginal_table(names, exact=True)).ravel(), qi)
    return _entropy_of_table(dist.marginal_probabilities(names), q)


def shannon_entropy(dist: JointDistribution, subset) -> float:
    """Shannon entropy in nats, via a plain loop independent of the kernels."""
    p = dist.marginal_probabilities(_names(subset))
    return -math.fsum(float(v) * math.log(v) for v in p if v > 0)


def _joint_entropy(dist, names, q):
    return tsallis_entropy(dist, names, q) if names else 0


def _disjoint(*groups) -> None:
    seen = set()
    for g in groups:
        g = set(g)
        if seen & g:
            raise ValueError("variable sets must be disjoint")
        seen |= g


def conditional_tsallis(dist: JointDistribution, X, Y, q):
    """``S_q(X|Y) = -sum p(xy)^q ln_q p(x|y)``, evaluated directly."""
    X, Y = _names(X), _names(Y)
    if not X:
        raise ValueError("X must be non-empty")
    _disjoint(X, Y)
    _check_q(q)
    if not Y:
        return tsallis_entropy(dist, X, q)
    order = [n for n in dist.names if n in set(X) | set(Y)]
    perm = [order.index(n) for n in order if n in Y] + [order.index(n) for n in order if n in X]
    qi = _exact_mode(dist, q)
    if qi is not None:
        pxy = np.transpose(dist.marginal_table(order, exact=True), perm)
        dy = int(np.prod(pxy.shape[: len(Y)]))
        pxy = pxy.reshape(dy, -1)
        total = Fraction(0)
        for row in pxy:
            py = sum(row, Fraction(0))
            for v in row:
                if v:
                    # p^q ln_q(p/py) = (p py^(q-1) - p^q) / (1 - q)
                    total += (v * py ** (qi - 1) - v ** qi) / (1 - qi)
        return -total
    pxy = np.transpose(dist.marginal_table(order), perm)
    dy = int(np.prod(pxy.shape[: len(Y)]))
    pxy = pxy.reshape(dy, -1)
    py = pxy.sum(axis=1, keepdims=True)
    mask = pxy > 0
    p = pxy[mask]
    cond = (pxy / np.where(py > 0, py, 1.0))[mask]
    if _is_shannon(q):
        return float(-(p * np.log(cond)).sum())
    q = float(q)
    lnq = np.expm1((1.0 - q) * np.log(cond)) / (1.0 - q)
    return float(-(p ** q * lnq).sum())


def tsallis_mi(dist: JointDistribution, X, Y, q):
    """``I_q(X:Y) = S_q(X) - S_q(X|Y)``."""
    X, Y = _names(X), _names(Y)
    if not X or not Y:
        raise ValueError("X and Y must be non-empty")
    _disjoint(X, Y)
    return tsallis_entropy(dist, X, q) - conditional_tsallis(dist, X, Y, q)


def tsallis_cmi(dist: JointDistribution, X, Y, Z, q):
    """``I_q(X:Y|Z) = S_q(X|Z) - S_q(X|YZ)`` using the direct conditional form."""
    X, Y, Z = _names(X), _names(Y), _names(Z)
    if not X or not Y:
        raise ValueError("X and Y must be non-empty")
    _disjoint(X, Y, Z)
    return conditional_tsallis(dist, X, Z, q) - conditional_tsallis(dist, X, Y + Z, q)


def tsallis_cmi_entropies(dist: JointDistribution, X, Y, Z, q):
    """``I_q(X:Y|Z) = S(XZ) + S(YZ) - S(Z) - S(XYZ)`` from joint entropies."""
    X, Y, Z = _names(X), _names(Y), _names(Z)
    _disjoint(X, Y, Z)
    return (_joint_entropy(dist, X + Z, q) + _joint_entropy(dist, Y + Z, q)
            - _joint_entropy(dist, Z, q) - _joint_entropy(dist, X + Y + Z, q))


def alt_conditional_tsallis(dist: JointDistribution, X, Y, q):
    """Alternative conditional entropy ``(sum p_xy^q / sum p_y^q - 1) / (1 - q)``."""
    X, Y = _names(X), _names(Y)
    if not X:
        raise ValueError("X must be non-empty")
    _disjoint(X, Y)
    if _is_shannon(q):
        raise ValueError("the alternative conditional entropy is undefined at q = 1")
    _check_q(q)
    qi = _exact_mode(dist, q)
    if qi is not None:
        sxy = sum((v ** qi for v in np.asarray(dist.marginal_table(X + Y, exact=True)).ravel() if v), Fraction(0))
        sy = sum((v ** qi for v in np.asarray(dist.marginal_table(Y, exact=True)).ravel() if v), Fraction(0)) if Y else Fraction(1)
        return (sxy / sy - 1) / (1 - qi)
    qa = np.array([float(q)])
    sxy = float(_kernels.power_sums(dist.marginal_probabilities(X + Y), qa)[0])
    sy = float(_kernels.power_sums(dist.marginal_probabilities(Y), qa)[0]) if Y else 1.0
    return (sxy / sy - 1.0) / (1.0 - float(q))


def bound_f(q, dX: int, dY: int):
    """``(1 - dX^(1-q)) (1 - dY^(1-q)) / (q - 1)``; zero at ``q = 1``.

    Exact ``Fraction`` for integer ``q >= 2``, float otherwise.
    """
    if dX < 1 or dY < 1:
        raise ValueError("alphabet sizes must be positive")
    _check_q(q)
    if _is_shannon(q):
        return Fraction(0) if isinstance(q, (int, Fraction)) else 0.0
    qi = integer_order(q)
    if qi is not None:
        return (1 - Fraction(1, dX ** (qi - 1))) * (1 - Fraction(1, dY ** (qi - 1))) / (qi - 1)
    q = float(q)
    a = -math.expm1((1.0 - q) * math.log(dX))
    b = -math.expm1((1.0 - q) * math.log(dY))
    return a * b / (q - 1.0)


def bound_f_decimal(q, dX: int, dY: int, digits: int = 50) -> Decimal:
    """High-precision ``f`` for non-integer orders."""
    with localcontext() as ctx:
        ctx.prec = digits + 5
        qd = Decimal(str(q)) if not isinstance(q, Decimal) else q
        if qd == 1:
            return Decimal(0)
        e = 1 - qd
        val = (1 - Decimal(dX) ** e) * (1 - Decimal(dY) ** e) / (qd - 1)
        ctx.prec = digits
        return +val


# -- entropy vectors -----------------------------------------------------------

def subset_masks(n: int) -> range:
    """Coordinates are the non-empty bitmasks 1 .. 2^n - 1 (bit i = variable i)."""
    return range(1, 1 << n)


def mask_names(mask: int, names: Sequence[str]) -> tuple:
    return tuple(names[i] for i in range(len(names)) if mask >> i & 1)


@dataclass(frozen=True)
class EntropyVector:
    """Entropies of every non-empty subset; ``values[mask - 1]`` is subset ``mask``."""

    names: tuple
    q: object
    values: tuple

    def __post_init__(self):
        if len(self.values) != (1 << len(self.names)) - 1:
            raise ValueError("entropy vector needs 2^n - 1 coordinates")

    @property
    def n(self) -> int:
        return len(self.names)

    def mask(self, subset) -> int:
        m = 0
        for s in _names(subset):
            m |= 1 << self.names.index(s)
        return m

    def __getitem__(self, subset):
        m = self.mask(subset)
        return 0 if m == 0 else self.values[m - 1]

    def as_dict(self) -> dict:
        return {mask_names(m, self.names): v for m, v in zip(subset_masks(self.n), self.values)}

    def to_dict(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else float(v)
        return {
            "names": list(self.names),
            "q": enc(self.q) if isinstance(self.q, Fraction) else self.q,
            "coordinates": [
                {"subset": sorted(mask_names(m, self.names)), "value": enc(v)}
                for m, v in zip(subset_masks(self.n), self.values)
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def entropy_vector(dist: JointDistribution, q, names: Sequence[str] | None = None) -> EntropyVector:
    names = tuple(dist.names if names is None else names)
    vals = tuple(tsallis_entropy(dist, mask_names(m, names), q) for m in subset_masks(len(names)))
    return EntropyVector(names, q, vals)


def entropy_vectors_many(dist: JointDistribution, qs, names: Sequence[str] | None = None) -> np.ndarray:
    """Float entropy vectors for many orders at once; shape ``(len(qs), 2^n - 1)``."""
    names = tuple(dist.names if names is None else names)
    qs = np.asarray(qs, dtype=float)
    out = np.empty((qs.size, (1 << len(names)) - 1))
    for m in subset_masks(len(names)):
        out[:, m - 1] = _kernels.tsallis_many(dist.marginal_probabilities(mask_names(m, names)), qs, Q_ONE_TOL)
    return out


def all_subsets(names: Iterable[str]):
    names = list(names)
    for k in range(1, len(names) + 1):
        yield from combinations(names, k)


def search_ssa_violation(q, cards=(2, 2, 2), samples: int = 1000, seed=None, concentration: float = 0.3):
    """Random ``p_XYZ`` with ``I_q(X:Y|Z) < 0``; returns ``(cmi, dist)`` or None.

    Only meaningful for ``q < 1``: for ``q >= 1`` the quantity is non-negative.
    """
    from .probability import VariableSpec

    rng = np.random.default_rng(seed)
    variables = [VariableSpec(n, c) for n, c in zip("XYZ", cards)]
    size = int(np.prod(cards))
    for _ in range(samples):
        dist = JointDistribution(variables, rng.dirichlet(np.full(size, concentration)))
        v = tsallis_cmi_entropies(dist, "X", "Y", "Z", q)
        if v < -1e-9:
            return v, dist
    return None

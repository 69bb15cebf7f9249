"""Discrete joint distributions over named finite variables.

Tables are stored as numpy arrays with one axis per variable, in declaration
order, so the flattened (C-order) table is indexed lexicographically with the
last variable varying fastest.  An optional exact table of ``Fraction`` values
travels alongside the float table for golden-value computations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

NORMALIZATION_TOL = 1e-12
INDEX_ORDER = "lexicographic, first variable slowest, last variable fastest"


@dataclass(frozen=True)
class VariableSpec:
    name: str
    cardinality: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError("variable name must be a non-empty string")
        if int(self.cardinality) != self.cardinality or self.cardinality < 1:
            raise ValueError(f"cardinality of {self.name!r} must be a positive integer")


class JointDistribution:
    """Immutable probability table over ``variables``.

    Parameters
    ----------
    variables:
        ``VariableSpec`` objects or ``(name, cardinality)`` pairs.
    probabilities:
        Flat sequence in lexicographic order, or an array already shaped by
        the cardinalities.  ``Fraction`` or integer-ratio strings switch on
        exact mode.
    """

    __slots__ = ("_variables", "_table", "_exact", "_names")

    def __init__(self, variables: Iterable, probabilities, *, exact=None, tol: float = NORMALIZATION_TOL):
        specs = tuple(v if isinstance(v, VariableSpec) else VariableSpec(*v) for v in variables)
        names = tuple(v.name for v in specs)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        shape = tuple(v.cardinality for v in specs)
        size = int(np.prod(shape, dtype=np.int64)) if shape else 1

        if exact is None and _looks_exact(probabilities):
            exact = probabilities
        if exact is not None:
            flat = [Fraction(v) for v in np.asarray(exact, dtype=object).ravel()]
            if len(flat) != size:
                raise ValueError(f"table has {len(flat)} entries, expected {size}")
            if any(v < 0 for v in flat):
                raise ValueError("negative probability")
            if sum(flat) != 1:
                raise ValueError(f"exact table sums to {sum(flat)}, not 1")
            exact_arr = np.empty(size, dtype=object)
            exact_arr[:] = flat
            exact_arr = exact_arr.reshape(shape)
            table = np.array([float(v) for v in flat], dtype=float).reshape(shape)
        else:
            exact_arr = None
            table = np.array(probabilities, dtype=float)
            if table.size != size:
                raise ValueError(f"table has {table.size} entries, expected {size}")
            table = table.reshape(shape)
            if (table < 0).any():
                raise ValueError("negative probability")
            total = table.sum()
            if abs(total - 1.0) > tol:
                raise ValueError(f"probabilities sum to {total!r}, not 1")
        table.setflags(write=False)
        self._variables = specs
        self._names = names
        self._table = table
        self._exact = exact_arr

    # -- accessors -------------------------------------------------------
    @property
    def variables(self) -> tuple:
        return self._variables

    @property
    def names(self) -> tuple:
        return self._names

    @property
    def shape(self) -> tuple:
        return self._table.shape

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def is_exact(self) -> bool:
        return self._exact is not None

    @property
    def exact_table(self):
        return self._exact

    def cardinality(self, name: str) -> int:
        return self._variables[self.axis(name)].cardinality

    def axis(self, name: str) -> int:
        try:
            return self._names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}; have {list(self._names)}") from None

    def __repr__(self) -> str:
        mode = "exact" if self.is_exact else "float"
        return f"JointDistribution({list(self._names)}, shape={self.shape}, {mode})"

    # -- marginals -------------------------------------------------------
    def _axes_to_sum(self, keep: Sequence[str]) -> tuple:
        keep_axes = {self.axis(n) for n in keep}
        return tuple(i for i in range(len(self._names)) if i not in keep_axes)

    def marginal_table(self, keep: Iterable[str], exact: bool = False) -> np.ndarray:
        """Marginal over ``keep`` with axes in declaration order."""
        keep = list(keep)
        axes = self._axes_to_sum(keep)
        if exact:
            if self._exact is None:
                raise ValueError("distribution has no exact table")
            return self._exact.sum(axis=axes) if axes else self._exact
        return self._table.sum(axis=axes) if axes else self._table

    def marginal_probabilities(self, keep: Iterable[str]) -> np.ndarray:
        return np.asarray(self.marginal_table(keep)).ravel()

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        if self._exact is not None:
            probs = [str(v) for v in self._exact.ravel()]
        else:
            probs = [float(v) for v in self._table.ravel()]
        return {
            "variables": [{"name": v.name, "cardinality": v.cardinality} for v in self._variables],
            "index_order": INDEX_ORDER,
            "probabilities": probs,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "JointDistribution":
        variables = [VariableSpec(v["name"], int(v["cardinality"])) for v in data["variables"]]
        return cls(variables, data["probabilities"])

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_rational(cls, variables: Iterable, values: Iterable) -> "JointDistribution":
        return cls(variables, None, exact=[Fraction(v) for v in values])


def _looks_exact(values) -> bool:
    if values is None:
        return False
    if isinstance(values, np.ndarray) and values.dtype != object:
        return False
    flat = np.asarray(values, dtype=object).ravel()
    return len(flat) > 0 and all(isinstance(v, (Fraction, str)) for v in flat)


def _check_names(dist: JointDistribution, names: Iterable[str]) -> list:
    names = list(names)
    for n in names:
        dist.axis(n)
    return names


def marginalize(dist: JointDistribution, keep: Iterable[str]) -> JointDistribution:
    """Distribution over ``keep`` (declaration order preserved)."""
    keep = set(_check_names(dist, keep))
    if not keep:
        raise ValueError("keep must be non-empty")
    specs = [v for v in dist.variables if v.name in keep]
    names = [v.name for v in specs]
    if dist.is_exact:
        return JointDistribution(specs, None, exact=dist.marginal_table(names, exact=True))
    return JointDistribution(specs, dist.marginal_table(names))


def condition(dist: JointDistribution, evidence: Mapping[str, int]):
    """Condition on ``{name: value}``.

    Returns ``(conditional, weight)``.  When the evidence has probability zero
    the conditional is ``None`` (there is no well-defined table).  Conditioning
    on every variable yields ``(None, weight)`` as well, since nothing remains.
    """
    index = [slice(None)] * len(dist.names)
    for name, value in evidence.items():
        ax = dist.axis(name)
        card = dist.variables[ax].cardinality
        if not 0 <= int(value) < card:
            raise ValueError(f"value {value} out of range for {name!r} (cardinality {card})")
        index[ax] = int(value)
    rest = [v for v in dist.variables if v.name not in evidence]
    if dist.is_exact:
        sub = dist.exact_table[tuple(index)]
        weight = Fraction(sum(np.asarray(sub, dtype=object).ravel(), Fraction(0)))
        if weight == 0 or not rest:
            return None, weight
        return JointDistribution(rest, None, exact=np.asarray(sub, dtype=object) / weight), weight
    sub = dist.table[tuple(index)]
    weight = float(np.sum(sub))
    if weight <= 0.0 or not rest:
        return None, weight
    return JointDistribution(rest, sub / weight, tol=1e-9), weight


def is_conditionally_independent(dist: JointDistribution, X, Y, Z=(), tol: float = 1e-10) -> bool:
    """Test ``p(xy|z) = p(x|z) p(y|z)`` for all ``z`` with ``p(z) > 0`` in max norm."""
    X, Y, Z = (set(_check_names(dist, s)) for s in (X, Y, Z))
    if not X or not Y:
        raise ValueError("X and Y must be non-empty")
    if X & Y or X & Z or Y & Z:
        raise ValueError("X, Y, Z must be disjoint")
    order = [n for n in dist.names if n in X | Y | Z]
    p = dist.marginal_table(order)
    # move axes into (Z..., X..., Y...) blocks
    zs = [order.index(n) for n in order if n in Z]
    xs = [order.index(n) for n in order if n in X]
    ys = [order.index(n) for n in order if n in Y]
    p = np.transpose(p, zs + xs + ys)
    dz = int(np.prod([p.shape[i] for i in range(len(zs))], dtype=np.int64))
    dx = int(np.prod([p.shape[len(zs) + i] for i in range(len(xs))], dtype=np.int64))
    p = p.reshape(dz, dx, -1)
    pz = p.sum(axis=(1, 2))
    for k in range(dz):
        if pz[k] <= 0.0:
            continue
        cond = p[k] / pz[k]
        prod = np.outer(cond.sum(axis=1), cond.sum(axis=0))
        if np.max(np.abs(cond - prod)) > tol:
            return False
    return True


def sample_markov_compatible(dag, seed=None) -> JointDistribution:
    """Draw a distribution that factorizes along ``dag``.

    Every conditional ``p(node | parents)`` is an independent flat Dirichlet
    draw, one per parent configuration.  The returned variables follow the
    DAG's node order.
    """
    rng = np.random.default_rng(seed)
    names = list(dag.names)
    cards = [dag.cardinality(n) for n in names]
    joint = np.ones(cards)
    for node in dag.topological_order():
        i = names.index(node)
        pars = sorted(dag.parents(node), key=names.index)
        pidx = [names.index(p) for p in pars]
        pshape = [cards[j] for j in pidx]
        kernel = rng.dirichlet(np.ones(cards[i]), size=int(np.prod(pshape, dtype=np.int64)) if pshape else 1)
        kernel = kernel.reshape(pshape + [cards[i]])
        # broadcast kernel over the joint's axes
        axes_order = pidx + [i]
        shape = [1] * len(names)
        for ax, size in zip(axes_order, pshape + [cards[i]]):
            shape[ax] = size
        perm = np.argsort(axes_order)
        joint = joint * np.transpose(kernel, perm).reshape(shape)
    joint /= joint.sum()
    return JointDistribution([VariableSpec(n, c) for n, c in zip(names, cards)], joint)

"""Causal DAGs, d-separation and conditional-independence enumeration."""
from __future__ import annotations

import itertools
import json
import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

log = logging.getLogger(__name__)

MAX_ENUMERATION_NODES = 8


@dataclass(frozen=True)
class Node:
    name: str
    observed: bool = True
    cardinality: int = 2


class Dag:
    """Directed acyclic graph with named nodes; validated on construction."""

    def __init__(self, nodes: Iterable, edges: Iterable = ()):
        built = []
        for nd in nodes:
            if isinstance(nd, Node):
                built.append(nd)
            elif isinstance(nd, str):
                built.append(Node(nd))
            elif isinstance(nd, Mapping):
                built.append(Node(nd["name"], bool(nd.get("observed", True)), int(nd.get("cardinality", 2))))
            else:
                built.append(Node(*nd))
        names = [n.name for n in built]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate node names: {names}")
        for n in built:
            if n.cardinality < 1:
                raise ValueError(f"node {n.name!r} has cardinality {n.cardinality}")
        self._nodes = tuple(built)
        self._names = tuple(names)
        self._parents = {n: [] for n in names}
        self._children = {n: [] for n in names}
        seen = set()
        for a, b in edges:
            for e in (a, b):
                if e not in self._parents:
                    raise ValueError(f"edge endpoint {e!r} is not a node")
            if (a, b) in seen:
                raise ValueError(f"duplicate edge {a}->{b}")
            if a == b:
                raise ValueError(f"self loop on {a!r}")
            seen.add((a, b))
            self._parents[b].append(a)
            self._children[a].append(b)
        self._edges = tuple((a, b) for a, b in edges)
        self._topo = self._toposort()

    def _toposort(self) -> tuple:
        indeg = {n: len(p) for n, p in self._parents.items()}
        queue = deque(n for n in self._names if indeg[n] == 0)
        order = []
        while queue:
            n = queue.popleft()
            order.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(order) != len(self._names):
            raise ValueError("graph contains a directed cycle")
        return tuple(order)

    # -- basic structure ---------------------------------------------------
    @property
    def names(self) -> tuple:
        return self._names

    @property
    def nodes(self) -> tuple:
        return self._nodes

    @property
    def edges(self) -> tuple:
        return self._edges

    def node(self, name: str) -> Node:
        self._check(name)
        return self._nodes[self._names.index(name)]

    def cardinality(self, name: str) -> int:
        return self.node(name).cardinality

    def observed(self) -> tuple:
        return tuple(n.name for n in self._nodes if n.observed)

    def topological_order(self) -> tuple:
        return self._topo

    def _check(self, name: str) -> None:
        if name not in self._parents:
            raise KeyError(f"unknown node {name!r}")

    def parents(self, name: str) -> set:
        self._check(name)
        return set(self._parents[name])

    def children(self, name: str) -> set:
        self._check(name)
        return set(self._children[name])

    def descendants(self, name: str) -> set:
        self._check(name)
        out, stack = set(), list(self._children[name])
        while stack:
            n = stack.pop()
            if n not in out:
                out.add(n)
                stack.extend(self._children[n])
        return out

    def ancestors(self, names: Iterable[str]) -> set:
        """Ancestors of a set, the set itself included."""
        out, stack = set(), list(names)
        while stack:
            n = stack.pop()
            self._check(n)
            if n not in out:
                out.add(n)
                stack.extend(self._parents[n])
        return out

    def non_descendants(self, name: str) -> set:
        """Nodes other than ``name``, its descendants and its parents."""
        return set(self._names) - {name} - self.descendants(name) - self.parents(name)

    def with_cardinalities(self, dims) -> "Dag":
        if isinstance(dims, int):
            dims = {n: dims for n in self._names}
        nodes = [Node(n.name, n.observed, int(dims.get(n.name, n.cardinality))) for n in self._nodes]
        return Dag(nodes, self._edges)

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "nodes": [{"name": n.name, "observed": n.observed, "cardinality": n.cardinality} for n in self._nodes],
            "edges": [list(e) for e in self._edges],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Dag":
        return cls(data["nodes"], [tuple(e) for e in data.get("edges", [])])

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "Dag":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"Dag(nodes={list(self._names)}, edges={list(self._edges)})"


def _builtin_table() -> dict:
    return {
        # sources A, B, L (the shared hidden variable), outputs X, Y
        "bell": (
            [Node("A"), Node("L", observed=False), Node("B"), Node("X"), Node("Y")],
            [("A", "X"), ("L", "X"), ("L", "Y"), ("B", "Y")],
        ),
        # hidden pairwise common causes A (Y,Z), B (X,Z), C (X,Y)
        "triangle": (
            [Node("A", False), Node("B", False), Node("C", False), Node("X"), Node("Y"), Node("Z")],
            [("B", "X"), ("C", "X"), ("A", "Y"), ("C", "Y"), ("A", "Z"), ("B", "Z")],
        ),
        "common-cause-3": (
            [Node("Z", False), Node("X"), Node("Y")],
            [("Z", "X"), ("Z", "Y")],
        ),
    }


BUILTIN_DAGS = tuple(_builtin_table())


def builtin_dag(name: str, cardinality: int | None = None) -> Dag:
    table = _builtin_table()
    if name not in table:
        raise KeyError(f"unknown builtin dag {name!r}; choose from {sorted(table)}")
    nodes, edges = table[name]
    dag = Dag(nodes, edges)
    return dag.with_cardinalities(cardinality) if cardinality is not None else dag


def parents(dag: Dag, node: str) -> set:
    return dag.parents(node)


def descendants(dag: Dag, node: str) -> set:
    return dag.descendants(node)


def non_descendants(dag: Dag, node: str) -> set:
    return dag.non_descendants(node)


@dataclass(frozen=True, order=True)
class CiStatement:
    """``X`` independent of ``Y`` given ``Z``, stored canonically."""

    X: tuple
    Y: tuple
    Z: tuple = ()

    @classmethod
    def make(cls, X: Iterable[str], Y: Iterable[str], Z: Iterable[str] = ()) -> "CiStatement":
        xs, ys, zs = tuple(sorted(set(X))), tuple(sorted(set(Y))), tuple(sorted(set(Z)))
        if not xs or not ys:
            raise ValueError("X and Y must be non-empty")
        if set(xs) & set(ys) or set(xs) & set(zs) or set(ys) & set(zs):
            raise ValueError("X, Y and Z must be pairwise disjoint")
        if ys < xs:
            xs, ys = ys, xs
        return cls(xs, ys, zs)

    def __str__(self) -> str:
        s = f"{''.join(self.X)}⊥{''.join(self.Y)}"
        return s + (f"|{''.join(self.Z)}" if self.Z else "")

    def to_dict(self) -> dict:
        return {"X": list(self.X), "Y": list(self.Y), "Z": list(self.Z)}


def is_d_separated(dag: Dag, X: Iterable[str], Y: Iterable[str], Z: Iterable[str] = ()) -> bool:
    """Decide whether ``Z`` d-separates ``X`` from ``Y``.

    Uses the reachability formulation: walk trails from ``X`` tracking the
    direction of arrival, passing through colliders only when they have a
    descendant in ``Z``.
    """
    X, Y, Z = set(X), set(Y), set(Z)
    for n in X | Y | Z:
        dag._check(n)
    if not X or not Y:
        raise ValueError("X and Y must be non-empty")
    if X & Y or X & Z or Y & Z:
        raise ValueError("X, Y and Z must be pairwise disjoint")
    anc_z = dag.ancestors(Z)
    # (node, arrived_from_child): True means we came up an edge node->child
    frontier = deque((x, True) for x in X)
    visited = set()
    while frontier:
        node, up = frontier.popleft()
        if (node, up) in visited:
            continue
        visited.add((node, up))
        if node in Y and node not in Z:
            return False
        if up:
            if node in Z:
                continue
            for p in dag._parents[node]:
                frontier.append((p, True))
            for c in dag._children[node]:
                frontier.append((c, False))
        else:
            if node not in Z:
                for c in dag._children[node]:
                    frontier.append((c, False))
            if node in anc_z:
                for p in dag._parents[node]:
                    frontier.append((p, True))
    return True


def markov_ci_list(dag: Dag) -> list:
    """Local Markov statements, one per node with a non-empty second argument."""
    out = []
    for node in dag.names:
        rest = dag.non_descendants(node)
        if not rest:
            log.info("node %s has no non-descendants outside its parents; statement dropped", node)
            continue
        out.append(CiStatement.make([node], rest, dag.parents(node)))
    return out


def enumerate_ci_statements(dag: Dag, nodes: Iterable[str] | None = None) -> list:
    """All canonical d-separation statements among ``nodes`` (default: every node)."""
    names = list(dag.names if nodes is None else nodes)
    n = len(names)
    if n > MAX_ENUMERATION_NODES:
        raise ValueError(f"enumeration limited to {MAX_ENUMERATION_NODES} nodes, got {n}")
    found = set()
    for labels in itertools.product(range(4), repeat=n):
        X = [names[i] for i in range(n) if labels[i] == 0]
        Y = [names[i] for i in range(n) if labels[i] == 1]
        if not X or not Y or sorted(Y) < sorted(X):
            continue
        Z = [names[i] for i in range(n) if labels[i] == 2]
        if is_d_separated(dag, X, Y, Z):
            found.add(CiStatement.make(X, Y, Z))
    return sorted(found, key=lambda s: (len(s.Z), s.Z, s.X, s.Y))


def ci_count_upper_bound(n: int) -> int:
    """Number of canonical (X, Y, Z) triples over ``n`` nodes."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return (4 ** n - 2 * 3 ** n + 2 ** n) // 2

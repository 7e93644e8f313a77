"""Ordinary heuristic graph search expressed as a one-level abstraction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _cs_dijkstra

from ..core import INF, Abstraction, AbstractState, Operator, SymbolicValuation
from ..roadmap import AStarResult, astar_search


@dataclass(frozen=True)
class ExplicitGraph:
    vertices: tuple[Hashable, ...]
    edges: tuple[tuple[Hashable, Hashable, float], ...]
    goal: Hashable
    heuristic: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple((a, b, float(c)) for a, b, c in self.edges))
        index = {v: i for i, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        if self.goal not in index:
            raise ValueError(f"goal {self.goal!r} is not a vertex")
        for a, b, c in self.edges:
            if a not in index or b not in index:
                raise ValueError(f"edge ({a!r}, {b!r}) uses an unknown vertex")
            if not (c >= 0 and c < INF):
                raise ValueError(f"edge ({a!r}, {b!r}) has invalid cost {c}")
        h = {v: float(self.heuristic.get(v, 0.0)) for v in self.vertices}
        if any(x < 0 or x != x for x in h.values()):
            raise ValueError("heuristic values must be nonnegative")
        if h[self.goal] != 0.0:
            raise ValueError("heuristic must vanish at the goal")
        object.__setattr__(self, "heuristic", h)

    @property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    def distances_to_goal(self) -> np.ndarray:
        """Exact cost-to-goal per vertex (reverse Dijkstra)."""
        idx = self.index
        n = len(self.vertices)
        m = _matrix(n, [(idx[b], idx[a], c) for a, b, c in self.edges])
        return _cs_dijkstra(m, directed=True, indices=idx[self.goal])

    def shortest_cost(self, start: Hashable) -> float:
        idx = self.index
        n = len(self.vertices)
        m = _matrix(n, [(idx[a], idx[b], c) for a, b, c in self.edges])
        return float(_cs_dijkstra(m, directed=True, indices=idx[start])[idx[self.goal]])

    def all_pairs(self) -> np.ndarray:
        idx = self.index
        n = len(self.vertices)
        m = _matrix(n, [(idx[a], idx[b], c) for a, b, c in self.edges])
        return _cs_dijkstra(m, directed=True)

    def heuristic_admissible(self, tol: float = 0.0) -> bool:
        d = self.distances_to_goal()
        return all(self.heuristic[v] <= d[i] + tol for i, v in enumerate(self.vertices))


def _matrix(n: int, triples) -> csr_matrix:
    # parallel edges: keep the cheapest; zero costs need an explicit tiny stand-in
    best: dict[tuple[int, int], float] = {}
    for a, b, c in triples:
        if c < best.get((a, b), INF):
            best[(a, b)] = c
    if not best:
        return csr_matrix((n, n))
    rows, cols, vals = zip(*((a, b, c) for (a, b), c in best.items()))
    vals = np.array(vals, dtype=float)
    if (vals == 0).any():
        raise ValueError("oracle matrices need positive costs")
    return csr_matrix((vals, (rows, cols)), shape=(n, n))


class FlatAbstraction(Abstraction):
    """States are single vertices; operators are edges plus Act."""

    def __init__(self, g: ExplicitGraph, start: Hashable):
        idx = g.index
        if start not in idx:
            raise ValueError(f"start {start!r} is not a vertex")
        self.graph = g
        self.names = g.vertices
        self.start = AbstractState.singleton(idx[start], f"{{{start}}}")
        self.goal = AbstractState.singleton(idx[g.goal], f"{{{g.goal}}}")
        self.act = Operator("Act", False, "act")
        self.edge_ops: list[Operator] = []
        self.out: list[list[Operator]] = [[] for _ in g.vertices]
        for k, (a, b, c) in enumerate(g.edges):
            op = Operator(f"e{k}:{a}->{b}", True, "edge", (idx[a], idx[b], c))
            self.edge_ops.append(op)
            self.out[idx[a]].append(op)
        self.has_zero_lower_bounds = any(c == 0 for _, _, c in g.edges)
        self._vals: dict[str, SymbolicValuation] = {}
        gi = idx[g.goal]
        self._act_val = SymbolicValuation(
            (AbstractState.singleton(i), self.goal, g.heuristic[v], INF if i != gi else 0.0)
            for i, v in enumerate(g.vertices)
        )

    def valuation_of(self, op: Operator) -> SymbolicValuation:
        if op.id == "Act":
            return self._act_val
        v = self._vals.get(op.id)
        if v is None:
            a, b, c = op.data
            v = self._vals[op.id] = SymbolicValuation(
                [(AbstractState.singleton(a), AbstractState.singleton(b), c, c)]
            )
        return v

    def refine(self, op: Operator, posts: Sequence[AbstractState]):
        if op.id != "Act":
            return
        gi = self.goal.element
        for s in posts:
            for e in self.out[s.element]:
                yield (e, self.act)
                if e.data[1] == gi:
                    yield (e,)

    def astar(self, trace: list | None = None) -> AStarResult:
        """A* over vertex indices with the graph's heuristic."""
        h = [self.graph.heuristic[v] for v in self.names]
        out = [[(e.data[1], e.data[2]) for e in ops] for ops in self.out]
        gi = self.goal.element
        return astar_search(self.start.element, out.__getitem__, lambda v: v == gi, h.__getitem__, trace)

    def astar_ops(self, path: Sequence[int]) -> list[Operator]:
        """Cheapest edge operator for each step of a vertex-index path."""
        return [min((e for e in self.out[a] if e.data[1] == b), key=lambda e: e.data[2]) for a, b in zip(path, path[1:])]

    def replay(self, ops: Sequence[Operator]) -> float:
        """Check a primitive plan is a connected path from start to goal; returns its cost."""
        v, cost = self.start.element, 0.0
        for o in ops:
            a, b, c = o.data
            if a != v:
                raise ValueError("plan is not a connected path")
            v, cost = b, cost + c
        if v != self.goal.element:
            raise ValueError("plan does not end in the goal")
        return cost

    def path(self, ops: Sequence[Operator]) -> list:
        """Vertex names visited by a primitive plan."""
        if not ops:
            return [self.names[self.start.element]]
        return [self.names[ops[0].data[0]]] + [self.names[o.data[1]] for o in ops]


def flat_abstraction(g: ExplicitGraph, start: Hashable) -> FlatAbstraction:
    return FlatAbstraction(g, start)


def random_graph(
    rng: np.random.Generator,
    n_max: int = 50,
    quantum: float = 0.25,
    h_scale: tuple[float, float] = (0.0, 1.0),
) -> tuple[ExplicitGraph, int]:
    """Random digraph with dyadic edge costs and an admissible scaled-distance heuristic."""
    n = int(rng.integers(2, n_max + 1))
    p = min(1.0, 3.0 / n)
    edges = []
    for a in range(n):
        for b in range(n):
            if a != b and rng.random() < p:
                edges.append((a, b, quantum * int(rng.integers(1, 41))))
    goal = int(rng.integers(n))
    start = int(rng.integers(n))
    base = ExplicitGraph(tuple(range(n)), tuple(edges), goal)
    d = base.distances_to_goal()
    lo, hi = h_scale
    h = {v: (float(d[v]) * float(rng.uniform(lo, hi)) if np.isfinite(d[v]) else float(rng.uniform(0, 100))) for v in range(n)}
    h[goal] = 0.0
    return ExplicitGraph(tuple(range(n)), tuple(edges), goal, h), start

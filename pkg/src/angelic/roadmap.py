"""PRM* roadmaps over a workspace and a Dijkstra shortest-path oracle."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Point2, Workspace, segments_collide

RNG_NAME = "numpy.random.PCG64"


GAMMA_MARGIN = 1.1


@dataclass(frozen=True)
class RoadmapConfig:
    """n samples; gamma=None picks GAMMA_MARGIN times the PRM* threshold for the free area."""

    n: int
    gamma: float | None = None
    seed: int = 0
    d: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("roadmap needs n >= 2 samples")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.d != 2:
            raise ValueError("only planar roadmaps are supported")

    def to_dict(self) -> dict:
        return {"n": self.n, "gamma": self.gamma, "seed": self.seed}


def gamma_threshold(free_area: float, d: int = 2) -> float:
    """2 (1 + 1/d)^(1/d) (mu_free / zeta_d)^(1/d), zeta_d the unit-ball volume."""
    zeta = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return 2.0 * (1.0 + 1.0 / d) ** (1.0 / d) * (free_area / zeta) ** (1.0 / d)


def resolve_gamma(cfg: RoadmapConfig, free_area: float) -> float:
    return cfg.gamma if cfg.gamma is not None else GAMMA_MARGIN * gamma_threshold(free_area, cfg.d)


def prm_radius(gamma: float, n: float, d: int) -> float:
    """gamma * (ln n / n) ** (1 / d)."""
    return gamma * (math.log(n) / n) ** (1.0 / d)


def connect_radius(cfg: RoadmapConfig, free_area: float = 1.0) -> float:
    return prm_radius(resolve_gamma(cfg, free_area), cfg.n, cfg.d)


@dataclass(frozen=True)
class Roadmap:
    points: np.ndarray
    edges: tuple[tuple[int, int, float], ...]
    connect_radius: float
    config: RoadmapConfig | None = None
    _adj: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        adj: list[list[tuple[int, float]]] = [[] for _ in range(len(pts))]
        for i, j, c in self.edges:
            adj[i].append((j, c))
            adj[j].append((i, c))
        object.__setattr__(self, "_adj", adj)

    @property
    def vertices(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self.points]

    def __len__(self) -> int:
        return len(self.points)

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        return self._adj[v]

    def point(self, v: int) -> Point2:
        x, y = self.points[v]
        return Point2(float(x), float(y))

    def restrict(self, keep: Callable[[int, int], bool]) -> "Roadmap":
        """Same vertices, only the edges accepted by keep."""
        return Roadmap(self.points, tuple(e for e in self.edges if keep(e[0], e[1])), self.connect_radius, self.config)

    def to_dict(self) -> dict:
        return {
            "vertices": self.points.tolist(),
            "edges": [[i, j, c] for i, j, c in self.edges],
            "connect_radius": self.connect_radius,
        }

    @classmethod
    def from_dict(cls, d: dict, config: RoadmapConfig | None = None) -> "Roadmap":
        return cls(
            np.asarray(d["vertices"], dtype=float),
            tuple((int(i), int(j), float(c)) for i, j, c in d["edges"]),
            float(d["connect_radius"]),
            config,
        )


def connect(points: np.ndarray, radius: float, ws: Workspace) -> tuple[tuple[int, int, float], ...]:
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if not len(pairs):
        return ()
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    P, Q = points[pairs[:, 0]], points[pairs[:, 1]]
    cost = np.hypot(Q[:, 0] - P[:, 0], Q[:, 1] - P[:, 1])
    keep = (cost > 0.0) & (cost <= radius)
    keep[keep] = ~segments_collide(P[keep], Q[keep], ws)
    return tuple((int(i), int(j), float(c)) for (i, j), c in zip(pairs[keep], cost[keep]))


def sample_free(ws: Workspace, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform rejection sampling of n free configurations."""
    x0, y0, x1, y1 = ws.bounds.bbox
    out = np.empty((0, 2))
    attempts = 0
    cap = 1000 * n
    while len(out) < n:
        if attempts >= cap:
            raise ValueError("free space too small: sampling did not terminate")
        m = min(max(2 * (n - len(out)), 64), cap - attempts)
        attempts += m
        cand = np.column_stack([rng.uniform(x0, x1, m), rng.uniform(y0, y1, m)])
        out = np.vstack([out, cand[ws.free_mask(cand)]])
    return out[:n]


def sample_prm_star(ws: Workspace, cfg: RoadmapConfig, extra: Sequence[Sequence[float]] = ()) -> Roadmap:
    """PRM* roadmap: extra anchors first (indices 0..k-1), then n samples."""
    anchors = np.asarray([[float(p[0]), float(p[1])] for p in extra], dtype=float).reshape(-1, 2)
    if len(anchors) and not ws.free_mask(anchors).all():
        raise ValueError("anchor point outside free space")
    rng = np.random.default_rng(cfg.seed)
    samples = sample_free(ws, cfg.n, rng)
    points = np.vstack([anchors, samples])
    r = connect_radius(cfg, ws.free_area())
    return Roadmap(points, connect(points, r, ws), r, cfg)


def dijkstra(
    rm: Roadmap, start: int, goal_test: Callable[[int], bool]
) -> tuple[float, list[int]]:
    """Exact shortest path from start to the nearest vertex passing goal_test."""
    dist = {start: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, start)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if goal_test(v):
            path = [v]
            while path[-1] != start:
                path.append(prev[path[-1]])
            return d, path[::-1]
        for w, c in rm.neighbors(v):
            nd = d + c
            if nd < dist.get(w, math.inf):
                dist[w] = nd
                prev[w] = v
                heapq.heappush(heap, (nd, w))
    return math.inf, []


def dijkstra_all(rm: Roadmap, sources: Sequence[int]) -> np.ndarray:
    """Distances from the nearest source to every vertex."""
    dist = np.full(len(rm), np.inf)
    heap = [(0.0, s) for s in sources]
    for s in sources:
        dist[s] = 0.0
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for w, c in rm.neighbors(v):
            nd = d + c
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


@dataclass
class AStarResult:
    cost: float
    path: list[int]
    expanded: int
    touched: int


def astar_search(
    start: Hashable,
    neighbors: Callable[[Hashable], Iterable[tuple[Hashable, float]]],
    goal_test: Callable[[Hashable], bool],
    h: Callable[[Hashable], float],
    trace: list | None = None,
) -> AStarResult:
    """Textbook A* with reopening, so admissible but inconsistent heuristics stay optimal.

    expanded counts expansions (a reopened node counts again), touched counts
    distinct nodes generated.  With a trace list, one record per expansion is
    appended to it.
    """
    g = {start: 0.0}
    prev: dict = {}
    tie = 0
    heap = [(h(start), 0.0, tie, start)]
    expanded = 0
    while heap:
        f, d, _, v = heapq.heappop(heap)
        if d > g.get(v, math.inf):
            continue
        if goal_test(v):
            path = [v]
            while path[-1] != start:
                path.append(prev[path[-1]])
            return AStarResult(d, path[::-1], expanded, len(g))
        if trace is not None:
            trace.append({"i": expanded, "node": v, "parent": prev.get(v), "g": d, "f": f})
        expanded += 1
        for w, c in neighbors(v):
            nd = d + c
            if nd < g.get(w, math.inf):
                g[w] = nd
                prev[w] = v
                tie += 1
                heapq.heappush(heap, (nd + h(w), nd, tie, w))
    return AStarResult(math.inf, [], expanded, len(g))


def astar(
    rm: Roadmap, start: int, goal_test: Callable[[int], bool], h: Callable[[int], float]
) -> AStarResult:
    """Direct roadmap A*."""
    return astar_search(start, rm.neighbors, goal_test, h)

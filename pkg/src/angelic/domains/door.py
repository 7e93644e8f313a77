"""Door puzzles: navigation where doors block motion until their switch is toggled.

Concrete states are (roadmap vertex, door mask); bit k of the mask is set when
door k is open.  All doors start closed.  Abstract states carry the mask as the
AbstractState tag, so a region intersection at a given mask is one state.

The Act lower bound visits every switch that must still be toggled and then
the goal: a minimum spanning tree over {v} + required switches + goal with
all-doors-open roadmap distances, plus one toggle cost per required switch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.csgraph import dijkstra as _cs_dijkstra

from ..core import (
    ANY,
    INF,
    Abstraction,
    AbstractState,
    ConfigurationError,
    Operator,
    SymbolicValuation,
    Valuation,
)
from ..geometry import Point2, Polygon, Workspace, segment_collides, segment_hits_interior, segments_hit_interior
from ..roadmap import AStarResult, Roadmap, RoadmapConfig, astar_search, sample_prm_star
from .nav import GOAL_ID, Region, RegionDecomposition, RegionGraph, goal_anchor

MAX_DOORS = 32
DEFAULT_TOGGLE_COST = 1.0


class InfeasibleError(ValueError):
    """The goal cannot be reached even with every door open."""


@dataclass(frozen=True)
class Door:
    polygon: Polygon
    switch: Point2


@dataclass(frozen=True)
class DoorState:
    position: int
    doors_open: int


@dataclass(frozen=True)
class DoorPuzzle:
    workspace: Workspace
    doors: tuple[Door, ...]
    decomposition: RegionDecomposition
    start: Point2
    goal: Polygon
    roadmap_config: RoadmapConfig = RoadmapConfig(500)
    roadmap: Roadmap | None = None
    toggle_cost: float = DEFAULT_TOGGLE_COST
    goal_anchor: Point2 | None = None

    def __post_init__(self):
        object.__setattr__(self, "doors", tuple(self.doors))
        if len(self.doors) > MAX_DOORS:
            raise ConfigurationError(f"at most {MAX_DOORS} doors are supported, got {len(self.doors)}")
        if not self.toggle_cost > 0:
            raise ConfigurationError("toggle cost must be positive")
        for k, d in enumerate(self.doors):
            if not self.workspace.is_free(d.switch):
                raise ValueError(f"switch {k} is not in free space")

    @property
    def n_doors(self) -> int:
        return len(self.doors)

    def anchor(self) -> Point2:
        return self.goal_anchor if self.goal_anchor is not None else goal_anchor(self.workspace, self.goal)


def build_door_roadmap(p: DoorPuzzle) -> Roadmap:
    """Vertex 0 is the start, 1 the goal anchor, 2 + k the switch of door k."""
    if p.roadmap is not None:
        return p.roadmap
    return sample_prm_star(p.workspace, p.roadmap_config, [p.start, p.anchor()] + [d.switch for d in p.doors])


@dataclass(frozen=True)
class EffectGraph:
    """Nodes: start, required switches, goal; symmetric lower-bound travel weights."""

    nodes: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.nodes), len(self.nodes)):
            raise ValueError("weight matrix does not match node count")
        if (w < 0).any() or np.isnan(w).any():
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", np.minimum(w, w.T))


def mst_lower_bound(g: EffectGraph) -> float:
    """Prim's MST weight; inf when the graph is disconnected.

    Hand-rolled because zero weights are legal here and sparse MST routines
    treat zeros as missing edges.
    """
    w = g.weights
    n = len(w)
    if n <= 1:
        return 0.0
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = w[0].copy()
    total = 0.0
    for _ in range(n - 1):
        cand = np.where(in_tree, INF, best)
        k = int(np.argmin(cand))
        if cand[k] == INF:
            return INF
        total += float(cand[k])
        in_tree[k] = True
        best = np.minimum(best, w[k])
    return total


@dataclass(frozen=True)
class RequiredSwitches:
    required: frozenset[int]
    precedence: frozenset[tuple[int, int]]


class _Relaxation:
    """All-open distances and per-door reachability on the roadmap."""

    def __init__(self, n: int, edges: Sequence[tuple[int, int, float]], door_bits: np.ndarray, n_doors: int,
                 switches: Sequence[int], goal_flags: np.ndarray):
        self.n = n
        a = np.array([e[0] for e in edges], dtype=int)
        b = np.array([e[1] for e in edges], dtype=int)
        c = np.array([e[2] for e in edges], dtype=float)
        self._a, self._b, self._c, self._bits = a, b, c, door_bits

        def graph(sel):
            return csr_matrix((c[sel], (a[sel], b[sel])), shape=(n, n))

        full = graph(np.ones(len(a), dtype=bool))
        goal_idx = np.flatnonzero(goal_flags)
        self.goal_dist = _cs_dijkstra(full, directed=False, indices=goal_idx, min_only=True) if len(goal_idx) else np.full(n, INF)
        self.switch_dist = _cs_dijkstra(full, directed=False, indices=list(switches)) if len(switches) else np.zeros((0, n))
        # comp[k]: components with only door k closed; goal_ok[k][v]: goal reachable from v then
        self.comp = np.zeros((n_doors, n), dtype=int)
        self.goal_ok = np.zeros((n_doors, n), dtype=bool)
        for k in range(n_doors):
            sel = (door_bits >> k) & 1 == 0
            _, lab = connected_components(graph(sel), directed=False)
            self.comp[k] = lab
            self.goal_ok[k] = np.isin(lab, np.unique(lab[goal_idx]))


class _DoorValuation(Valuation):
    existential = True

    def __init__(self):
        self._cache: dict[AbstractState, dict] = {}

    def summary(self, s: AbstractState) -> dict:
        hit = self._cache.get(s)
        if hit is None:
            hit = self._cache[s] = self._summary(s) if s.tag is not None and s.tag != ANY else {}
        return hit

    def _summary(self, s: AbstractState) -> dict:
        raise NotImplementedError


class _MoveValuation(_DoorValuation):
    def __init__(self, a: int, b: int, c: float, bits: int):
        super().__init__()
        self.a, self.b, self.c, self.bits = a, b, c, bits

    def _summary(self, s):
        m = s.tag
        if not (s.mask >> self.a) & 1 or self.bits & ~m:
            return {}
        exact = s.mask == 1 << self.a
        return {AbstractState.singleton((self.b, m)): (self.c, self.c if exact else INF)}


class _ToggleValuation(_DoorValuation):
    def __init__(self, k: int, sv: int, cost: float):
        super().__init__()
        self.k, self.sv, self.cost = k, sv, cost

    def _summary(self, s):
        if not (s.mask >> self.sv) & 1:
            return {}
        exact = s.mask == 1 << self.sv
        return {AbstractState.singleton((self.sv, s.tag ^ (1 << self.k))): (self.cost, self.cost if exact else INF)}


class _GoValuation(_DoorValuation):
    """Reach the switch vertex of door k, optionally only from inside one region."""

    def __init__(self, sv: int, dist: np.ndarray, within: int | None):
        super().__init__()
        self.sv, self.dist, self.within = sv, dist, within

    def _summary(self, s):
        mask = s.mask if self.within is None else s.mask & self.within
        if not mask:
            return {}
        members = np.asarray(AbstractState(mask).base_members())
        lo = float(self.dist[members].min())
        if lo == INF:
            return {}
        up = 0.0 if s.mask == 1 << self.sv else INF
        return {AbstractState.singleton((self.sv, s.tag)): (lo, up)}


class _LiftedRegionValuation(_DoorValuation):
    """A navigation region operator evaluated under a fixed door mask."""

    def __init__(self, base: SymbolicValuation):
        super().__init__()
        self.base = base

    def _summary(self, s):
        out = {}
        for d, (l, _) in self.base.summary(AbstractState(s.mask)).items():
            out[AbstractState(d.mask, f"{d.name}/{s.tag:b}", s.tag)] = (l, INF)
        return out


class _ActValuation(_DoorValuation):
    def __init__(self, owner: "DoorAbstraction"):
        super().__init__()
        self.owner = owner

    def _summary(self, s):
        members = np.asarray(AbstractState(s.mask).base_members())
        lo = self.owner.act_lower(members, s.tag)
        if lo == INF:
            return {}
        up = 0.0 if s.mask & ~self.owner.goal.mask == 0 else INF
        return {self.owner.goal: (lo, up)}


class DoorAbstraction(Abstraction):
    def __init__(self, p: DoorPuzzle, validate: bool = True):
        ws = p.workspace
        if not ws.is_free(p.start):
            raise ValueError("start is not in free space")
        if validate:
            p.decomposition.validate_coverage(ws, extra=(p.goal,))
        rm = build_door_roadmap(p)
        N = p.n_doors
        self.problem = p
        self.n_doors = N
        self.toggle_cost = float(p.toggle_cost)
        regions = list(p.decomposition.regions) + [Region(GOAL_ID, p.goal, p.goal.is_convex)]
        self.graph = RegionGraph(ws, regions, rm, ws.obstacles)
        self.roadmap = self.graph.roadmap
        self.goal_index = len(regions) - 1
        self.goal_flags = self.graph.member[self.goal_index]
        self.switch_vertex = [2 + k for k in range(N)]
        if len(rm) < 2 + N:
            raise ValueError("roadmap lacks the start, goal and switch anchors")
        pts = self.roadmap.points
        edges = self.roadmap.edges
        P = pts[[e[0] for e in edges]] if edges else np.zeros((0, 2))
        Q = pts[[e[1] for e in edges]] if edges else np.zeros((0, 2))
        bits = np.zeros(len(edges), dtype=np.int64)
        for k, d in enumerate(p.doors):
            bits |= segments_hit_interior(P, Q, d.polygon).astype(np.int64) << k
        self.edge_bits = {(min(a, b), max(a, b)): int(x) for (a, b, _), x in zip(edges, bits)}
        self.relax = _Relaxation(len(pts), edges, bits, N, self.switch_vertex, self.goal_flags)
        if not self.relax.goal_dist[0] < INF:
            raise InfeasibleError("goal unreachable even with every door open")

        self.start = AbstractState.singleton((0, 0), "{start}")
        self.goal = AbstractState(self.graph.vmask[self.goal_index], "G", ANY)
        self.act = Operator("Act", False, "act")
        self.has_zero_lower_bounds = True
        self.region_ops: dict[tuple[int, int], Operator] = {
            (i, j): Operator(f"a[{regions[i].id},{regions[j].id}]", False, "region", (i, j))
            for (i, j) in self.graph.inter
            if i != j
        }
        self.go_ops = [Operator(f"Go[S{k + 1}]", False, "go", k) for k in range(N)]
        self.within_ops: dict[tuple[int, int], Operator] = {}
        self.toggle_ops = [Operator(f"T{k + 1}", True, "toggle", k) for k in range(N)]
        self._moves: dict[tuple[int, int], Operator] = {}
        self._vals: dict[str, Valuation] = {}
        self._act_val = _ActValuation(self)
        self._act_memo: dict = {}

    # bounds -------------------------------------------------------------
    def required(self, members: np.ndarray, mask: int) -> list[int]:
        """Closed doors that every member must open to reach the goal."""
        out = []
        for k in range(self.n_doors):
            if not (mask >> k) & 1 and not self.relax.goal_ok[k][members].any():
                out.append(k)
        return out

    def effect_graph(self, members: np.ndarray, mask: int) -> EffectGraph:
        req = self.required(members, mask)
        rx = self.relax
        sv = [self.switch_vertex[k] for k in req]
        n = len(req) + 2
        w = np.zeros((n, n))
        for a, k in enumerate(req, start=1):
            w[0, a] = w[a, 0] = rx.switch_dist[k][members].min()
            w[a, n - 1] = w[n - 1, a] = rx.goal_dist[sv[a - 1]]
            for b, k2 in enumerate(req, start=1):
                if b != a:
                    w[a, b] = rx.switch_dist[k][sv[b - 1]]
        w[0, n - 1] = w[n - 1, 0] = rx.goal_dist[members].min()
        return EffectGraph(("v",) + tuple(f"S{k + 1}" for k in req) + ("goal",), w)

    def act_lower(self, members: np.ndarray, mask: int) -> float:
        key = (members.tobytes(), mask)
        hit = self._act_memo.get(key)
        if hit is None:
            g = self.effect_graph(members, mask)
            hit = self._act_memo[key] = mst_lower_bound(g) + self.toggle_cost * (len(g.nodes) - 2)
        return hit

    # operators ----------------------------------------------------------
    def move(self, a: int, b: int, c: float) -> Operator:
        op = self._moves.get((a, b))
        if op is None:
            op = self._moves[(a, b)] = Operator(f"m{a}-{b}", True, "move", (a, b, c))
        return op

    def within(self, i: int, k: int) -> Operator:
        op = self.within_ops.get((i, k))
        if op is None:
            op = self.within_ops[(i, k)] = Operator(f"b[{self.graph.regions[i].id},S{k + 1}]", False, "within", (i, k))
        return op

    def valuation_of(self, op: Operator) -> Valuation:
        if op.kind == "act":
            return self._act_val
        v = self._vals.get(op.id)
        if v is not None:
            return v
        if op.kind == "move":
            a, b, c = op.data
            v = _MoveValuation(a, b, c, self.edge_bits[(min(a, b), max(a, b))])
        elif op.kind == "toggle":
            k = op.data
            v = _ToggleValuation(k, self.switch_vertex[k], self.toggle_cost)
        elif op.kind == "go":
            k = op.data
            v = _GoValuation(self.switch_vertex[k], self.relax.switch_dist[k], None)
        elif op.kind == "within":
            i, k = op.data
            v = _GoValuation(self.switch_vertex[k], self.relax.switch_dist[k], self.graph.vmask[i])
        elif op.kind == "region":
            v = _LiftedRegionValuation(self._nav_region_valuation(*op.data))
        else:
            raise KeyError(op.id)
        self._vals[op.id] = v
        return v

    def _nav_region_valuation(self, i: int, j: int) -> SymbolicValuation:
        g = self.graph
        dst = g.inter_state(i, j)
        rows = []
        for kind, src, k, lo, _ in g.move_rows(i, j):
            s = AbstractState(src, f"I[{g.regions[k].id},{g.regions[i].id}]") if kind == "set" else AbstractState.singleton(src)
            rows.append((s, dst, lo, INF))
        return SymbolicValuation(rows, existential=True)

    def _passable(self, a: int, b: int, mask: int) -> bool:
        return self.edge_bits[(min(a, b), max(a, b))] & ~mask == 0

    def _edges(self, i: int, v: int, m: int):
        for w, c in self.graph.adj[i].get(v, ()):
            if self._passable(v, w, m):
                yield w, self.move(v, w, c)

    def refine(self, op: Operator, posts: Sequence[AbstractState]):
        g = self.graph
        for s in posts:
            if not s.is_singleton:
                continue
            v, m = s.element
            if op.kind == "act":
                if self.goal_flags[v]:
                    continue
                for i in g.vertex_regions[v]:
                    for j in g.succ[i]:
                        a = self.region_ops[(i, j)]
                        yield (a, self.act)
                        if j == self.goal_index:
                            yield (a,)
                # closing a door never shortens a path, so only closed doors are worth a trip
                for k in range(self.n_doors):
                    if not (m >> k) & 1:
                        yield (self.go_ops[k], self.toggle_ops[k], self.act)
            elif op.kind == "go":
                sv = self.switch_vertex[op.data]
                if v == sv:
                    yield ()
                    continue
                for i in g.vertex_regions[v]:
                    if g.member[i, sv]:
                        yield (self.within(i, op.data),)
                    for j in g.succ[i]:
                        yield (self.region_ops[(i, j)], op)
            elif op.kind == "within":
                i, k = op.data
                sv = self.switch_vertex[k]
                if not g.member[i, v]:
                    continue
                for w, e in self._edges(i, v, m):
                    yield (e, op)
                    if w == sv:
                        yield (e,)
            elif op.kind == "region":
                i, j = op.data
                if not g.member[i, v]:
                    continue
                jm = g.member[j]
                for w, e in self._edges(i, v, m):
                    yield (e, op)
                    if jm[w]:
                        yield (e,)

    # oracles and helpers -------------------------------------------------
    def _product_neighbors(self, v: int, m: int):
        for w, c in self.roadmap.neighbors(v):
            if self._passable(v, w, m):
                yield w, m, c
        for k, sv in enumerate(self.switch_vertex):
            if sv == v:
                yield v, m ^ (1 << k), self.toggle_cost

    def _product_search(self, h, trace: list | None = None) -> AStarResult:
        return astar_search(
            (0, 0),
            lambda x: (((w, m), c) for w, m, c in self._product_neighbors(*x)),
            lambda x: bool(self.goal_flags[x[0]]),
            lambda x: h(x[0]),
            trace,
        )

    def product_dijkstra(self) -> AStarResult:
        """Exact optimum over (vertex, mask) states."""
        return self._product_search(lambda v: 0.0)

    def astar(self, trace: list | None = None) -> AStarResult:
        """Direct A* over (vertex, mask) with the Euclidean goal-distance heuristic."""
        from ..geometry import points_polygon_distance

        hd = points_polygon_distance(self.roadmap.points, self.problem.goal)
        return self._product_search(lambda v: float(hd[v]), trace)

    def astar_ops(self, path: Sequence[tuple[int, int]]) -> list[Operator]:
        """Move and toggle operators along a product-space path."""
        cost = {(a, b): c for a, b, c in self.roadmap.edges}
        out = []
        for (v, m), (w, m2) in zip(path, path[1:]):
            if m != m2:
                out.append(self.toggle_ops[(m ^ m2).bit_length() - 1])
            else:
                out.append(self.move(v, w, cost.get((v, w), cost.get((w, v)))))
        return out

    def toggle_order(self, ops: Sequence[Operator]) -> tuple[int, ...]:
        """1-based door numbers in the order their switches are toggled."""
        return tuple(o.data + 1 for o in ops if o.kind == "toggle")

    def path_toggles(self, path: Sequence[tuple[int, int]]) -> tuple[int, ...]:
        """Toggle order along a product-space path."""
        out = []
        for (v, m), (w, m2) in zip(path, path[1:]):
            if m != m2:
                out.append((m ^ m2).bit_length())
        return tuple(out)

    def replay(self, ops: Sequence[Operator]) -> float:
        """Re-check a primitive plan against walls, closed doors and switches; returns its cost."""
        ws = self.problem.workspace
        pts = self.roadmap.points
        v, m, cost = 0, 0, 0.0
        for o in ops:
            if o.kind == "move":
                a, b, c = o.data
                if a != v:
                    raise ValueError("plan is not a connected path")
                if segment_collides(pts[a], pts[b], ws):
                    raise ValueError(f"segment {a}-{b} collides")
                for k, d in enumerate(self.problem.doors):
                    if not (m >> k) & 1 and segment_hits_interior(pts[a], pts[b], d.polygon):
                        raise ValueError(f"segment {a}-{b} passes closed door {k + 1}")
                v = b
                cost += math.hypot(*(pts[b] - pts[a]))
            elif o.kind == "toggle":
                if v != self.switch_vertex[o.data]:
                    raise ValueError(f"toggle {o.data + 1} away from its switch")
                m ^= 1 << o.data
                cost += self.toggle_cost
            else:
                raise ValueError(f"{o.id} is not primitive")
        if not self.goal_flags[v]:
            raise ValueError("plan does not end in the goal")
        return cost

    def concrete_label(self, element):
        return element


def door_abstraction(p: DoorPuzzle, validate: bool = True) -> DoorAbstraction:
    return DoorAbstraction(p, validate)


def required_switches(p: DoorPuzzle | DoorAbstraction) -> RequiredSwitches:
    """Switches every start-to-goal path must toggle, with their forced precedences."""
    d = p if isinstance(p, DoorAbstraction) else DoorAbstraction(p, validate=False)
    rx = d.relax
    req = frozenset(d.required(np.array([0]), 0))
    prec = set()
    for s in req:
        for t in req:
            if s != t and rx.comp[s][d.switch_vertex[t]] != rx.comp[s][0]:
                prec.add((s, t))
    return RequiredSwitches(req, frozenset(prec))


def corridor_door_puzzle(
    order: Sequence[int],
    switch_rooms: Sequence[int] | None = None,
    roadmap_config: RoadmapConfig = RoadmapConfig(200),
    room: float = 4.0,
    height: float = 4.0,
    wall: float = 0.2,
    gap: float = 1.0,
    toggle_cost: float = DEFAULT_TOGGLE_COST,
) -> DoorPuzzle:
    """Rooms 0..N in a row; doorway p holds door order[p]; all doors start closed.

    switch_rooms[k] is the room holding door k's switch (default: the room just
    before that door).  Start sits in room 0, the goal in room N.
    """
    N = len(order)
    if sorted(order) != list(range(N)):
        raise ValueError("order must be a permutation of the door indices")
    pos = {k: p for p, k in enumerate(order)}
    if switch_rooms is None:
        switch_rooms = [pos[k] for k in range(N)]
    if len(switch_rooms) != N or any(not 0 <= r <= N for r in switch_rooms):
        raise ValueError("switch_rooms needs one room index in 0..N per door")
    B = Polygon.box
    width = (N + 1) * room
    g0, g1 = height / 2 - gap / 2, height / 2 + gap / 2
    obstacles, doors_at, regions = [], [], []
    for p in range(N):
        x = (p + 1) * room
        obstacles += [B(x - wall / 2, 0, x + wall / 2, g0), B(x - wall / 2, g1, x + wall / 2, height)]
        doors_at.append(B(x - wall / 2, g0, x + wall / 2, g1))
        regions.append(Region(f"d{p}", B(x - room / 2, 0, x + room / 2, height), True))
    for r in range(N + 1):
        x0 = r * room + (wall / 2 if r > 0 else 0.0)
        x1 = (r + 1) * room - (wall / 2 if r < N else 0.0)
        regions.append(Region(f"r{r}", B(x0, 0, x1, height), True))
    ws = Workspace(B(0, 0, width, height), tuple(obstacles))
    per_room: dict[int, list[int]] = {}
    for k, r in enumerate(switch_rooms):
        per_room.setdefault(r, []).append(k)
    switches: dict[int, Point2] = {}
    for r, ks in per_room.items():
        for j, k in enumerate(ks):
            x = r * room + (j + 1) * room / (len(ks) + 1)
            switches[k] = Point2(x, 0.8 if j % 2 == 0 else height - 0.8)
    doors = tuple(Door(doors_at[pos[k]], switches[k]) for k in range(N))
    goal = B(width - 1.5, height / 2 - 0.6, width - 0.3, height / 2 + 0.6)
    return DoorPuzzle(ws, doors, RegionDecomposition(tuple(regions)), Point2(0.8, height / 2), goal, roadmap_config,
                      toggle_cost=toggle_cost)

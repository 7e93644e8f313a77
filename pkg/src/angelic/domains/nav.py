"""Region-decomposition navigation over a PRM* roadmap.

Operators a_ij move inside region R_i and stop somewhere in R_i ∩ R_j. Their
lower bounds are Euclidean set distances; upper bounds are Hausdorff
distances, emitted only for regions flagged convex and free of obstacles.
Upper bounds are existential (every start point reaches *some* point of the
target set) and hold for continuous motion; on a finite roadmap they are
estimates, so the search never trusts them for solutions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import shapely
from shapely.geometry import Point as _SPoint
from shapely.geometry import Polygon as _SPolygon

from ..core import INF, Abstraction, AbstractState, Operator, SymbolicValuation
from ..geometry import (
    Point2,
    Polygon,
    Workspace,
    hausdorff_distance,
    point_hausdorff,
    points_in_polygon,
    points_polygon_distance,
    polygon_intersection,
    segment_collides,
    segment_inside,
    set_distance,
)
from ..roadmap import Roadmap, RoadmapConfig, astar_search, dijkstra, sample_free, sample_prm_star

GOAL_ID = "goal"
COVERAGE_SAMPLES = 10_000


class CoverageError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    id: str
    polygon: Polygon
    convex: bool = False


@dataclass(frozen=True)
class RegionDecomposition:
    regions: tuple[Region, ...]
    _tree: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        ids = [r.id for r in self.regions]
        if len(set(ids)) != len(ids):
            raise ValueError("region ids must be unique")
        if GOAL_ID in ids:
            raise ValueError(f"region id {GOAL_ID!r} is reserved for the goal")
        boxes = [shapely.box(*r.polygon.bbox) for r in self.regions]
        object.__setattr__(self, "_tree", shapely.STRtree(boxes))

    def __len__(self) -> int:
        return len(self.regions)

    @property
    def overlap(self) -> set[frozenset[str]]:
        from ..geometry import polygons_intersect

        out = set()
        for a in range(len(self.regions)):
            for b in range(a + 1, len(self.regions)):
                ra, rb = self.regions[a], self.regions[b]
                if polygons_intersect(ra.polygon, rb.polygon):
                    out.add(frozenset((ra.id, rb.id)))
        return out

    def regions_at(self, p) -> list[int]:
        """Indices of regions whose closed polygon contains p (bounding-box index first)."""
        from ..geometry import point_in_polygon

        cand = self._tree.query(_SPoint(float(p[0]), float(p[1])))
        return sorted(int(i) for i in cand if point_in_polygon(p, self.regions[int(i)].polygon))

    def covered_mask(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        covered = np.zeros(len(pts), dtype=bool)
        for r in self.regions:
            x0, y0, x1, y1 = r.polygon.bbox
            sel = (~covered) & (pts[:, 0] >= x0 - 1e-9) & (pts[:, 0] <= x1 + 1e-9) & (pts[:, 1] >= y0 - 1e-9) & (pts[:, 1] <= y1 + 1e-9)
            if sel.any():
                idx = np.flatnonzero(sel)
                covered[idx[points_in_polygon(pts[idx], r.polygon)]] = True
        return covered

    def validate_coverage(self, ws: Workspace, samples: int = COVERAGE_SAMPLES, seed: int = 0, extra: Sequence[Polygon] = ()) -> None:
        """Every sampled free point must lie in some region (or an extra polygon such as the goal)."""
        pts = sample_free(ws, samples, np.random.default_rng(seed))
        covered = self.covered_mask(pts)
        for poly in extra:
            if (~covered).any():
                idx = np.flatnonzero(~covered)
                covered[idx[points_in_polygon(pts[idx], poly)]] = True
        missing = int((~covered).sum())
        if missing:
            x, y = pts[np.flatnonzero(~covered)[0]]
            raise CoverageError(f"{missing} of {samples} free samples lie outside every region, e.g. ({x:.3f}, {y:.3f})")


@dataclass(frozen=True)
class NavProblem:
    workspace: Workspace
    decomposition: RegionDecomposition
    start: Point2
    goal: Polygon
    roadmap_config: RoadmapConfig = RoadmapConfig(1000)
    roadmap: Roadmap | None = None
    goal_anchor: Point2 | None = None

    def anchor(self) -> Point2:
        """A free point strictly inside the goal, used as roadmap vertex 1."""
        if self.goal_anchor is not None:
            return self.goal_anchor
        return goal_anchor(self.workspace, self.goal)


def goal_anchor(ws: Workspace, goal: Polygon, seed: int = 0) -> Point2:
    from ..geometry import point_in_interior

    sp = _SPolygon(goal.vertices)
    for q in (sp.centroid, sp.representative_point()):
        p = Point2(float(q.x), float(q.y))
        if point_in_interior(p, goal) and ws.is_free(p):
            return p
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = goal.bbox
    for _ in range(100):
        cand = np.column_stack([rng.uniform(x0, x1, 256), rng.uniform(y0, y1, 256)])
        ok = ws.free_mask(cand)
        for x, y in cand[ok]:
            if point_in_interior((x, y), goal):
                return Point2(float(x), float(y))
    raise ValueError("goal region does not intersect free space")


def build_roadmap(p: NavProblem) -> Roadmap:
    if p.roadmap is not None:
        return p.roadmap
    return sample_prm_star(p.workspace, p.roadmap_config, [p.start, p.anchor()])


def _to_mask(flags: np.ndarray) -> int:
    if not flags.any():
        return 0
    return int.from_bytes(np.packbits(flags.astype(np.uint8), bitorder="little").tobytes(), "little")


def _min_set_distance(a: list[Polygon], b: list[Polygon]) -> float:
    return min(set_distance(x, y) for x in a for y in b)


def _points_distance(pts: np.ndarray, pieces: list[Polygon]) -> np.ndarray:
    return np.min(np.stack([points_polygon_distance(pts, q) for q in pieces]), axis=0)


class RegionGraph:
    """Roadmap vertices and edges sorted into regions, plus a_ij bound tables."""

    def __init__(self, ws: Workspace, regions: Sequence[Region], rm: Roadmap, obstacles: Sequence[Polygon] = ()):
        self.ws = ws
        self.regions = list(regions)
        self.n = len(rm)
        pts = rm.points
        R = len(self.regions)
        self.member = np.zeros((R, self.n), dtype=bool)
        for i, r in enumerate(self.regions):
            self.member[i] = points_in_polygon(pts, r.polygon)
        self.vmask = [_to_mask(self.member[i]) for i in range(R)]
        self.vertex_regions: list[tuple[int, ...]] = [tuple(np.flatnonzero(self.member[:, v])) for v in range(self.n)]
        # edges contained in each region
        self.adj: list[dict[int, list[tuple[int, float]]]] = [dict() for _ in range(R)]
        kept = []
        e_arr = np.array([(a, b) for a, b, _ in rm.edges], dtype=int).reshape(-1, 2)
        inside = np.zeros((R, len(rm.edges)), dtype=bool)
        for i, r in enumerate(self.regions):
            both = self.member[i, e_arr[:, 0]] & self.member[i, e_arr[:, 1]] if len(e_arr) else np.zeros(0, bool)
            if r.polygon.is_convex:
                inside[i] = both
            else:
                for k in np.flatnonzero(both):
                    a, b = e_arr[k]
                    inside[i, k] = segment_inside(pts[a], pts[b], r.polygon)
        for k, (a, b, c) in enumerate(rm.edges):
            regs = np.flatnonzero(inside[:, k])
            if len(regs) == 0:
                continue
            kept.append((a, b, c))
            for i in regs:
                self.adj[i].setdefault(a, []).append((b, c))
                self.adj[i].setdefault(b, []).append((a, c))
        self.roadmap = Roadmap(pts, tuple(kept), rm.connect_radius, rm.config)
        self.dropped_edges = len(rm.edges) - len(kept)
        # pairwise intersections with positive area and at least one vertex
        self.pieces: dict[tuple[int, int], list[Polygon]] = {}
        self.inter: dict[tuple[int, int], int] = {}
        for i in range(R):
            for j in range(i + 1, R):
                pi, pj = self.regions[i].polygon, self.regions[j].polygon
                if not _bbox_overlap(pi.bbox, pj.bbox):
                    continue
                pieces = polygon_intersection(pi, pj)
                m = _to_mask(self.member[i] & self.member[j])
                if pieces and m:
                    self.pieces[(i, j)] = self.pieces[(j, i)] = pieces
                    self.inter[(i, j)] = self.inter[(j, i)] = m
        self.succ: list[list[int]] = [sorted(j for (a, j) in self.inter if a == i) for i in range(R)]
        counts = self.member.sum(axis=0)
        self.core = [self.member[i] & (counts == 1) for i in range(R)]
        self.free_of_obstacles = [
            not any(_bbox_overlap(r.polygon.bbox, o.bbox) and polygon_intersection(r.polygon, o) for o in obstacles)
            for r in self.regions
        ]

    def inter_state(self, i: int, j: int, tag=None) -> AbstractState:
        return AbstractState(self.inter[(i, j)], f"I[{self.regions[i].id},{self.regions[j].id}]", tag)

    def upper_ok(self, *idx: int) -> bool:
        return all(self.regions[k].convex for k in idx) and self.free_of_obstacles[idx[0]]

    def move_rows(self, i: int, j: int) -> list[tuple]:
        """(src-kind, src, lower, upper) rows bounding motion in R_i into R_i ∩ R_j.

        src-kind is 'set' with a vertex mask, or 'vertex' with an index.
        """
        target = self.pieces[(i, j)]
        rows = []
        for k in range(len(self.regions)):
            if k == i or (k, i) not in self.inter:
                continue
            src = self.pieces[(k, i)]
            lo = _min_set_distance(src, target)
            up = INF
            if self.upper_ok(i, j, k) and len(src) == 1 and len(target) == 1:
                up = max(lo, hausdorff_distance(src[0], target[0]))
            rows.append(("set", self.inter[(k, i)], k, lo, up))
        core = np.flatnonzero(self.core[i])
        if len(core):
            pts = self.roadmap.points[core]
            lows = _points_distance(pts, target)
            ok = self.upper_ok(i, j) and len(target) == 1
            for v, lo in zip(core, lows):
                up = max(lo, point_hausdorff(self.roadmap.points[v], target[0])) if ok else INF
                rows.append(("vertex", int(v), None, float(lo), up))
        return rows


def _bbox_overlap(a, b) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


class NavAbstraction(Abstraction):
    def __init__(self, p: NavProblem, validate: bool = True):
        ws = p.workspace
        if not ws.is_free(p.start):
            raise ValueError("start is not in free space")
        if validate:
            p.decomposition.validate_coverage(ws, extra=(p.goal,))
        rm = build_roadmap(p)
        if len(rm) < 2 or tuple(rm.point(0)) != tuple(p.start):
            raise ValueError("roadmap vertex 0 must be the start")
        self.problem = p
        regions = list(p.decomposition.regions) + [Region(GOAL_ID, p.goal, p.goal.is_convex)]
        self.graph = RegionGraph(ws, regions, rm, ws.obstacles)
        self.roadmap = self.graph.roadmap
        self.goal_index = len(regions) - 1
        self.goal_flags = self.graph.member[self.goal_index]
        self.start = AbstractState.singleton(0, "{start}")
        self.goal = AbstractState(self.graph.vmask[self.goal_index], "G")
        self.act = Operator("Act", False, "act")
        self.has_zero_lower_bounds = True
        self.ops: dict[tuple[int, int], Operator] = {}
        self._vals: dict[str, SymbolicValuation] = {}
        for (i, j) in self.graph.inter:
            if j == i:
                continue
            ri, rj = regions[i].id, regions[j].id
            self.ops[(i, j)] = Operator(f"a[{ri},{rj}]", False, "region", (i, j))
        self._moves: dict[tuple[int, int], Operator] = {}
        self.goal_distance = points_polygon_distance(self.roadmap.points, p.goal)
        self._act_val = SymbolicValuation(
            (
                (AbstractState.singleton(v), self.goal, float(self.goal_distance[v]), 0.0 if self.goal_flags[v] else INF)
                for v in range(len(self.roadmap))
            ),
            existential=True,
        )

    # operators ----------------------------------------------------------
    def move(self, a: int, b: int, c: float) -> Operator:
        op = self._moves.get((a, b))
        if op is None:
            op = self._moves[(a, b)] = Operator(f"m{a}-{b}", True, "move", (a, b, c))
        return op

    def valuation_of(self, op: Operator) -> SymbolicValuation:
        if op.kind == "act":
            return self._act_val
        v = self._vals.get(op.id)
        if v is not None:
            return v
        if op.kind == "move":
            a, b, c = op.data
            v = SymbolicValuation([(AbstractState.singleton(a), AbstractState.singleton(b), c, c)])
        elif op.kind == "region":
            v = self._region_valuation(*op.data)
        else:
            raise KeyError(op.id)
        self._vals[op.id] = v
        return v

    def _region_valuation(self, i: int, j: int) -> SymbolicValuation:
        g = self.graph
        dst = g.inter_state(i, j)
        rows = []
        for kind, src, k, lo, up in g.move_rows(i, j):
            s = AbstractState(src, f"I[{g.regions[k].id},{g.regions[i].id}]") if kind == "set" else AbstractState.singleton(src)
            rows.append((s, dst, lo, up))
        return SymbolicValuation(rows, existential=True)

    def refine(self, op: Operator, posts: Sequence[AbstractState]):
        g = self.graph
        for s in posts:
            if not s.is_singleton:
                continue
            v = s.element
            if op.kind == "act":
                if self.goal_flags[v]:
                    continue
                for i in g.vertex_regions[v]:
                    for j in g.succ[i]:
                        a = self.ops[(i, j)]
                        yield (a, self.act)
                        if j == self.goal_index:
                            yield (a,)
            elif op.kind == "region":
                i, j = op.data
                if not g.member[i, v]:
                    continue
                jm = g.member[j]
                for w, c in g.adj[i].get(v, ()):
                    e = self.move(v, w, c)
                    yield (e, op)
                    if jm[w]:
                        yield (e,)

    # helpers ------------------------------------------------------------
    def path(self, ops: Sequence[Operator]) -> list[int]:
        if not ops:
            return [0]
        return [ops[0].data[0]] + [o.data[1] for o in ops]

    def replay(self, ops: Sequence[Operator]) -> float:
        """Re-check a primitive plan against the workspace; returns its cost."""
        ws = self.problem.workspace
        pts = self.roadmap.points
        path = self.path(ops)
        if path[0] != 0:
            raise ValueError("plan does not start at the start vertex")
        cost = 0.0
        for o, (a, b) in zip(ops, zip(path, path[1:])):
            if o.data[0] != a:
                raise ValueError("plan is not a connected path")
            if segment_collides(pts[a], pts[b], ws):
                raise ValueError(f"segment {a}-{b} collides")
            cost += math.hypot(*(pts[b] - pts[a]))
        if not self.goal_flags[path[-1]]:
            raise ValueError("plan does not end in the goal")
        return cost

    def dijkstra_cost(self) -> float:
        return dijkstra(self.roadmap, 0, lambda v: bool(self.goal_flags[v]))[0]

    def astar(self, trace: list | None = None):
        """Direct roadmap A* with the Euclidean goal-distance heuristic."""
        return astar_search(
            0, self.roadmap.neighbors, lambda v: bool(self.goal_flags[v]), lambda v: float(self.goal_distance[v]), trace
        )

    def astar_ops(self, path: Sequence[int]) -> list[Operator]:
        """Move operators along a roadmap vertex path."""
        cost = {(a, b): c for a, b, c in self.roadmap.edges}
        return [self.move(a, b, cost.get((a, b), cost.get((b, a)))) for a, b in zip(path, path[1:])]


def nav_abstraction(p: NavProblem, validate: bool = True) -> NavAbstraction:
    return NavAbstraction(p, validate)


def nav_valuation(nav: NavAbstraction, i: int, j: int) -> SymbolicValuation:
    return nav.valuation_of(nav.ops[(i, j)])


def euclidean_act_valuation(nav: NavAbstraction) -> SymbolicValuation:
    return nav.valuation_of(nav.act)

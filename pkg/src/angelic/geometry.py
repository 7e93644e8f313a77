"""Planar geometry: polygons, collision predicates, set and Hausdorff distances.

Distances are computed analytically from point/segment primitives. Sampling
only ever appears in the test suite, as an oracle.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

TOL = 1e-9


class GeometryError(ValueError):
    """Raised for malformed geometric input."""


class Point2(NamedTuple):
    x: float
    y: float

    @classmethod
    def of(cls, xy: Sequence[float]) -> "Point2":
        x, y = float(xy[0]), float(xy[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite coordinate {xy!r}")
        return cls(x, y)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def signed_area(pts: Sequence[Point2]) -> float:
    s = 0.0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _segments_touch(p1, p2, q1, q2, tol=TOL) -> bool:
    """Closed segment intersection test (touching counts)."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True
    return (
        point_segment_distance(p1, q1, q2) <= tol
        or point_segment_distance(p2, q1, q2) <= tol
        or point_segment_distance(q1, p1, p2) <= tol
        or point_segment_distance(q2, p1, p2) <= tol
    )


def point_segment_distance(p, a, b) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return _dist(p, a)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def segment_segment_distance(p1, p2, q1, q2) -> float:
    if _segments_touch(p1, p2, q1, q2, tol=0.0):
        return 0.0
    return min(
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
    )


@dataclass(frozen=True)
class Polygon:
    """Simple polygon without holes, vertices counterclockwise."""

    vertices: tuple[Point2, ...]
    _bbox: tuple[float, float, float, float] = field(init=False, repr=False, compare=False)
    _convex: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(Point2.of(v) for v in self.vertices)
        object.__setattr__(self, "vertices", pts)
        if len(pts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        if signed_area(pts) <= 0.0:
            raise GeometryError("polygon must be counterclockwise with positive area")
        n = len(pts)
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            if _dist(a, b) == 0.0:
                raise GeometryError("repeated vertex")
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or j == (i + 1) % n:
                    continue
                if _segments_touch(a, b, pts[j], pts[(j + 1) % n], tol=0.0):
                    raise GeometryError("polygon is self-intersecting")
        xs = [p.x for p in pts]
        ys = [p.y for p in pts]
        object.__setattr__(self, "_bbox", (min(xs), min(ys), max(xs), max(ys)))
        object.__setattr__(
            self, "_convex", all(_cross(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) >= -TOL for i in range(n))
        )

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[float]]) -> "Polygon":
        """Build from (x, y) pairs in either orientation."""
        pts = [Point2.of(c) for c in coords]
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) >= 3 and signed_area(pts) < 0:
            pts.reverse()
        return cls(tuple(pts))

    @classmethod
    def box(cls, x0: float, y0: float, x1: float, y1: float) -> "Polygon":
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return self._bbox

    @property
    def is_convex(self) -> bool:
        return self._convex

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def edges(self):
        v = self.vertices
        n = len(v)
        return [(v[i], v[(i + 1) % n]) for i in range(n)]

    def coords(self) -> list[list[float]]:
        return [[p.x, p.y] for p in self.vertices]


def point_on_boundary(p, poly: Polygon, tol: float = TOL) -> bool:
    return any(point_segment_distance(p, a, b) <= tol for a, b in poly.edges())


def _inside_open(p, poly: Polygon) -> bool:
    # even-odd ray casting; boundary handled by callers
    x, y = p
    inside = False
    for (x0, y0), (x1, y1) in poly.edges():
        if (y0 > y) != (y1 > y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xi > x:
                inside = not inside
    return inside


def point_in_polygon(p, poly: Polygon) -> bool:
    """Closed membership: boundary points count as inside."""
    x0, y0, x1, y1 = poly.bbox
    if p[0] < x0 - TOL or p[0] > x1 + TOL or p[1] < y0 - TOL or p[1] > y1 + TOL:
        return False
    return point_on_boundary(p, poly) or _inside_open(p, poly)


def point_in_interior(p, poly: Polygon) -> bool:
    x0, y0, x1, y1 = poly.bbox
    if p[0] <= x0 or p[0] >= x1 or p[1] <= y0 or p[1] >= y1:
        return False
    return _inside_open(p, poly) and not point_on_boundary(p, poly)


def points_in_polygon(pts: np.ndarray, poly: Polygon, tol: float = TOL) -> np.ndarray:
    """Vectorized closed membership for an (m, 2) array."""
    inside, on_edge = _classify(pts, poly, tol)
    return inside | on_edge


def points_in_interior(pts: np.ndarray, poly: Polygon, tol: float = TOL) -> np.ndarray:
    inside, on_edge = _classify(pts, poly, tol)
    return inside & ~on_edge


def _classify(pts, poly: Polygon, tol: float):
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    on_edge = np.zeros(len(pts), dtype=bool)
    for (x0, y0), (x1, y1) in poly.edges():
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (xi > x)
        dx, dy = x1 - x0, y1 - y0
        den = dx * dx + dy * dy
        t = np.clip(((x - x0) * dx + (y - y0) * dy) / den, 0.0, 1.0)
        d = np.hypot(x - (x0 + t * dx), y - (y0 + t * dy))
        on_edge |= d <= tol
    return inside, on_edge


def point_polygon_distance(p, poly: Polygon) -> float:
    if point_in_polygon(p, poly):
        return 0.0
    return min(point_segment_distance(p, a, b) for a, b in poly.edges())


def points_polygon_distance(pts: np.ndarray, poly: Polygon) -> np.ndarray:
    """Vectorized distance from each point to the closed polygon."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    best = np.full(len(pts), np.inf)
    for (x0, y0), (x1, y1) in poly.edges():
        dx, dy = x1 - x0, y1 - y0
        t = np.clip(((x - x0) * dx + (y - y0) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
        best = np.minimum(best, np.hypot(x - (x0 + t * dx), y - (y0 + t * dy)))
    best[points_in_polygon(pts, poly)] = 0.0
    return best


def polygons_intersect(a: Polygon, b: Polygon) -> bool:
    """True iff the closed polygons share at least one point."""
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    if ax0 > bx1 + TOL or bx0 > ax1 + TOL or ay0 > by1 + TOL or by0 > ay1 + TOL:
        return False
    for p, q in a.edges():
        for r, s in b.edges():
            if _segments_touch(p, q, r, s):
                return True
    return point_in_polygon(a.vertices[0], b) or point_in_polygon(b.vertices[0], a)


def set_distance(a: Polygon, b: Polygon) -> float:
    """inf ||s - s'|| over s in a, s' in b; zero when the closed sets meet."""
    if polygons_intersect(a, b):
        return 0.0
    return min(segment_segment_distance(p, q, r, s) for p, q in a.edges() for r, s in b.edges())


def triangulate(poly: Polygon) -> list[tuple[Point2, Point2, Point2]]:
    """Ear clipping triangulation of a simple ccw polygon."""
    idx = list(range(len(poly.vertices)))
    v = poly.vertices
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * len(v) ** 2:
            raise GeometryError("triangulation failed")
        n = len(idx)
        for k in range(n):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % n]
            a, b, c = v[i0], v[i1], v[i2]
            if _cross(a, b, c) <= 0:
                continue
            ear = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = v[j]
                if _cross(a, b, p) >= 0 and _cross(b, c, p) >= 0 and _cross(c, a, p) >= 0:
                    ear = False
                    break
            if ear:
                tris.append((a, b, c))
                del idx[k]
                break
        else:
            raise GeometryError("no ear found; polygon not simple")
    tris.append(tuple(v[i] for i in idx))
    return tris


def _points_segments_distance(pts: np.ndarray, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """dist[i, j] from point i to segment P[j]Q[j]."""
    X = np.asarray(pts, dtype=float)[:, None, :]
    d = Q - P
    t = np.clip(((X - P) * d).sum(-1) / (d * d).sum(-1), 0.0, 1.0)
    return np.hypot(*(X - (P + t[..., None] * d)).transpose(2, 0, 1))


def _directed_hausdorff(a: Polygon, b: Polygon, tol: float = TOL) -> float:
    """sup over x in a of dist(x, b).

    For nonconvex b, dist(x, b) is 0 inside b and otherwise the min over b's
    edges of a convex per-edge distance, so over a small triangle of a each
    per-edge distance peaks at a corner and the min over edges of the corner
    maxima bounds the sup there (a triangle inside b contributes 0).  Triangles
    of a are refined best-first until no bound exceeds the best value found by
    more than tol.  If the refinement budget runs out, the largest outstanding
    bound is returned, so the result never underestimates.
    """
    if b.is_convex:
        # distance to a convex set is a convex function: the sup sits at a vertex
        return max(point_polygon_distance(p, b) for p in a.vertices)
    E = np.asarray(b.edges(), dtype=float)
    P, Q = E[:, 0], E[:, 1]

    def upper(tri) -> float:
        if all(segment_inside(tri[i], tri[(i + 1) % 3], b) for i in range(3)):
            return 0.0
        return float(_points_segments_distance(np.asarray(tri), P, Q).max(axis=0).min())

    best = float(points_polygon_distance(np.asarray(a.vertices, dtype=float), b).max())
    heap = []
    counter = itertools.count()
    for tri in triangulate(a):
        t = tuple(tuple(map(float, p)) for p in tri)
        heapq.heappush(heap, (-upper(t), next(counter), t))
    budget = 50_000
    while heap:
        neg_upper, _, tri = heap[0]
        if -neg_upper <= best + tol:
            return best
        if budget == 0:
            return -neg_upper
        budget -= 1
        heapq.heappop(heap)
        p, q, r = tri
        pq = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        qr = ((q[0] + r[0]) / 2, (q[1] + r[1]) / 2)
        rp = ((r[0] + p[0]) / 2, (r[1] + p[1]) / 2)
        best = max(best, float(points_polygon_distance(np.array([pq, qr, rp]), b).max()))
        for sub in ((p, pq, rp), (pq, q, qr), (rp, qr, r), (pq, qr, rp)):
            up = upper(sub)
            if up > best + tol:
                heapq.heappush(heap, (-up, next(counter), sub))
    return best


def hausdorff_distance(a: Polygon, b: Polygon) -> float:
    """max(sup_a inf_b, sup_b inf_a) over the closed polygons."""
    if a == b:
        return 0.0
    return max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))


def point_hausdorff(p, poly: Polygon) -> float:
    """Hausdorff distance between the singleton {p} and a polygon."""
    far = max(_dist(p, v) for v in poly.vertices)
    return max(far, point_polygon_distance(p, poly))


def jung_epsilon(n: int) -> float:
    """Convexity slack for convex regions cluttered with small convex objects."""
    if n < 1:
        raise ValueError("dimension must be positive")
    return math.pi * math.sqrt(n / (2.0 * (n + 1)))


def polygon_intersection(a: Polygon, b: Polygon, min_area: float = 1e-12) -> list[Polygon]:
    """Positive-area pieces of a ∩ b."""
    import shapely

    if not polygons_intersect(a, b):
        return []
    g = shapely.Polygon(a.coords()).intersection(shapely.Polygon(b.coords()))
    out = []
    for part in getattr(g, "geoms", [g]):
        if part.geom_type != "Polygon" or part.area <= min_area:
            continue
        coords = list(part.exterior.coords)[:-1]
        # drop collinear points that shapely may leave behind
        clean = []
        for i, c in enumerate(coords):
            prev, nxt = coords[i - 1], coords[(i + 1) % len(coords)]
            if abs(_cross(prev, c, nxt)) > 1e-14 * max(1.0, part.area):
                clean.append(c)
        if len(clean) >= 3:
            try:
                out.append(Polygon.from_coords(clean))
            except GeometryError:
                continue
    return out


# --- collision checking -------------------------------------------------------


def _boundary_params(a, b, poly: Polygon) -> list[float]:
    """Parameters t in [0, 1] where segment ab meets the polygon boundary."""
    ts = [0.0, 1.0]
    dx, dy = b[0] - a[0], b[1] - a[1]
    for c, d in poly.edges():
        ex, ey = d[0] - c[0], d[1] - c[1]
        den = dx * ey - dy * ex
        if abs(den) > 1e-15:
            t = ((c[0] - a[0]) * ey - (c[1] - a[1]) * ex) / den
            s = ((c[0] - a[0]) * dy - (c[1] - a[1]) * dx) / den
            if -TOL <= t <= 1 + TOL and -TOL <= s <= 1 + TOL:
                ts.append(min(1.0, max(0.0, t)))
        else:
            # parallel: collinear overlap contributes its endpoints
            if abs(_cross(a, b, c)) <= TOL * max(1.0, math.hypot(dx, dy)):
                den2 = dx * dx + dy * dy
                if den2 == 0.0:
                    continue
                for q in (c, d):
                    t = ((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / den2
                    if 0.0 <= t <= 1.0:
                        ts.append(t)
    return sorted(set(ts))


def segment_hits_interior(a, b, poly: Polygon) -> bool:
    """True iff segment ab meets the open interior of poly."""
    x0, y0, x1, y1 = poly.bbox
    if max(a[0], b[0]) <= x0 or min(a[0], b[0]) >= x1 or max(a[1], b[1]) <= y0 or min(a[1], b[1]) >= y1:
        return False
    ts = _boundary_params(a, b, poly)
    for t0, t1 in zip(ts, ts[1:]):
        tm = 0.5 * (t0 + t1)
        m = (a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1]))
        if point_in_interior(m, poly):
            return True
    return False


def segment_inside(a, b, poly: Polygon) -> bool:
    """True iff the whole closed segment lies in the closed polygon."""
    if not (point_in_polygon(a, poly) and point_in_polygon(b, poly)):
        return False
    if poly.is_convex:
        return True
    ts = _boundary_params(a, b, poly)
    for t0, t1 in zip(ts, ts[1:]):
        tm = 0.5 * (t0 + t1)
        if not point_in_polygon((a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1])), poly):
            return False
    return True


@dataclass(frozen=True)
class Workspace:
    bounds: Polygon
    obstacles: tuple[Polygon, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for ob in self.obstacles:
            if not all(point_in_polygon(v, self.bounds) for v in ob.vertices):
                raise GeometryError("obstacle leaves the workspace bounds")
        if self.free_area() <= 0.0:
            raise GeometryError("workspace has no free space")

    def free_area(self) -> float:
        import shapely

        free = shapely.Polygon(self.bounds.coords())
        if self.obstacles:
            free = free.difference(shapely.union_all([shapely.Polygon(o.coords()) for o in self.obstacles]))
        return float(free.area)

    def is_free(self, p) -> bool:
        return point_in_polygon(p, self.bounds) and not any(point_in_interior(p, o) for o in self.obstacles)

    def free_mask(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        ok = points_in_polygon(pts, self.bounds)
        for ob in self.obstacles:
            ok &= ~points_in_interior(pts, ob)
        return ok


def segment_collides(a, b, ws: Workspace) -> bool:
    """True iff ab crosses an obstacle interior or leaves the bounds.

    Boundary contact with an obstacle is not a collision.
    """
    if not segment_inside(a, b, ws.bounds):
        return True
    return any(segment_hits_interior(a, b, ob) for ob in ws.obstacles)


def _segments_hit_convex(P: np.ndarray, Q: np.ndarray, poly: Polygon, tol: float = 1e-12) -> np.ndarray:
    """Vectorized: closed segments PQ meeting the open interior of a convex polygon.

    Separating-axis test over the polygon edge normals and the segment normal;
    projections that only touch count as separated.
    """
    V = np.asarray(poly.vertices, dtype=float)
    E = np.roll(V, -1, axis=0) - V
    axes = [np.array([e[1], -e[0]]) for e in E]
    hit = np.ones(len(P), dtype=bool)
    for n in axes:
        pv = V @ n
        lo, hi = pv.min(), pv.max()
        a, b = P @ n, Q @ n
        smin, smax = np.minimum(a, b), np.maximum(a, b)
        eps = tol * max(1.0, float(np.abs(n).max())) * max(1.0, float(np.abs(V).max()))
        hit &= ~((smax <= lo + eps) | (smin >= hi - eps))
    D = Q - P
    N = np.column_stack([-D[:, 1], D[:, 0]])
    proj = N @ V.T
    s = np.einsum("ij,ij->i", N, P)
    scale = np.maximum(1.0, np.abs(N).max(axis=1)) * max(1.0, float(np.abs(V).max()))
    eps = tol * scale
    hit &= ~((proj.max(axis=1) <= s + eps) | (proj.min(axis=1) >= s - eps))
    return hit


def segments_hit_interior(P: np.ndarray, Q: np.ndarray, poly: Polygon) -> np.ndarray:
    """Vectorized segment_hits_interior for segment arrays P[k] -> Q[k]."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    Q = np.asarray(Q, dtype=float).reshape(-1, 2)
    out = np.zeros(len(P), dtype=bool)
    x0, y0, x1, y1 = poly.bbox
    cand = ~(
        (np.maximum(P[:, 0], Q[:, 0]) <= x0)
        | (np.minimum(P[:, 0], Q[:, 0]) >= x1)
        | (np.maximum(P[:, 1], Q[:, 1]) <= y0)
        | (np.minimum(P[:, 1], Q[:, 1]) >= y1)
    )
    idx = np.flatnonzero(cand)
    if not len(idx):
        return out
    if poly.is_convex:
        out[idx] = _segments_hit_convex(P[idx], Q[idx], poly)
    else:
        for k in idx:
            out[k] = segment_hits_interior(P[k], Q[k], poly)
    return out


def segments_collide(P: np.ndarray, Q: np.ndarray, ws: Workspace) -> np.ndarray:
    """Vectorized segment_collides for segment arrays P[k] -> Q[k]."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    Q = np.asarray(Q, dtype=float).reshape(-1, 2)
    out = ~(points_in_polygon(P, ws.bounds) & points_in_polygon(Q, ws.bounds))
    if not ws.bounds.is_convex:
        for k in np.flatnonzero(~out):
            out[k] = not segment_inside(P[k], Q[k], ws.bounds)
    for ob in ws.obstacles:
        live = np.flatnonzero(~out)
        if not len(live):
            break
        out[live] = segments_hit_interior(P[live], Q[live], ob)
    return out

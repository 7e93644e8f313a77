import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angelic.geometry import (
    GeometryError,
    Point2,
    Polygon,
    Workspace,
    hausdorff_distance,
    jung_epsilon,
    point_hausdorff,
    point_in_polygon,
    points_polygon_distance,
    polygons_intersect,
    segment_collides,
    segment_inside,
    segments_collide,
    set_distance,
)

from conftest import grid_points, random_convex, random_star

B = Polygon.box
UNIT = B(0, 0, 1, 1)


@pytest.mark.parametrize("p, inside", [((0.5, 0.5), True), ((1.0, 0.5), True), ((2.0, 0.5), False), ((0, 0), True)])
def test_point_in_unit_square(p, inside):
    assert point_in_polygon(p, UNIT) is inside


def test_polygon_validation():
    with pytest.raises(GeometryError):
        Polygon(((0, 0), (1, 0)))
    with pytest.raises(GeometryError):
        Polygon(((0, 0), (0, 1), (1, 1), (1, 0)))  # clockwise
    with pytest.raises(GeometryError):
        Polygon.from_coords([(0, 0), (2, 2), (2, 0), (0, 2)])  # bow tie
    with pytest.raises(GeometryError):
        Point2.of((math.nan, 0))
    # from_coords accepts either orientation and a closing vertex
    p = Polygon.from_coords([(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)])
    assert p.area == pytest.approx(1.0)


def test_workspace_validation():
    with pytest.raises(GeometryError):
        Workspace(UNIT, (B(0.5, 0.5, 2, 2),))
    with pytest.raises(GeometryError):
        Workspace(UNIT, (UNIT,))


def test_segment_collides_basic():
    ws = Workspace(B(0, 0, 4, 4), (B(1, 1, 2, 2),))
    assert segment_collides((0, 1.5), (3, 1.5), ws)
    assert not segment_collides((0, 0.5), (3, 0.5), Workspace(B(0, 0, 4, 4)))
    # grazing a vertex or running along an edge is not a collision
    assert not segment_collides((0, 0), (3, 3), Workspace(B(0, 0, 4, 4), (B(1, 2, 2, 3),)))
    assert not segment_collides((0.5, 0.5), (2.5, 2.5 - 1.5), ws)
    assert not segment_collides((1, 0), (1, 3), ws)
    # leaving the bounds counts
    assert segment_collides((3, 3), (5, 3), ws)


def test_segment_collides_nonconvex_bounds():
    L = Polygon.from_coords([(0, 0), (4, 0), (4, 1), (1, 1), (1, 4), (0, 4)])
    ws = Workspace(L)
    assert segment_collides((0.5, 3.5), (3.5, 0.5), ws)
    assert not segment_collides((0.5, 3.5), (0.5, 0.5), ws)


def test_vectorized_collisions_match_scalar(rng):
    obstacles = (B(1, 1, 2, 3), Polygon.from_coords([(3, 3), (4, 3.5), (3.2, 4.5)]), random_star(rng, 6.5, 2, 0.8))
    ws = Workspace(B(0, 0, 8, 6), obstacles)
    P = rng.uniform((0, 0), (8, 6), size=(3000, 2))
    Q = rng.uniform((0, 0), (8, 6), size=(3000, 2))
    # some exact vertex and edge contacts
    P[:4] = [(0, 0), (1, 0), (0, 1), (2, 0)]
    Q[:4] = [(1, 1), (1, 1), (2, 1), (2, 3)]
    fast = segments_collide(P, Q, ws)
    slow = np.array([segment_collides(p, q, ws) for p, q in zip(P, Q)])
    assert (fast == slow).all()


def test_segment_inside():
    assert segment_inside((0, 0), (1, 1), UNIT)
    assert not segment_inside((0, 0), (1.5, 1), UNIT)
    U = Polygon.from_coords([(0, 0), (3, 0), (3, 3), (2, 3), (2, 1), (1, 1), (1, 3), (0, 3)])
    assert not segment_inside((0.5, 2.5), (2.5, 2.5), U)
    assert segment_inside((0.5, 0.5), (2.5, 0.5), U)


def test_set_distance_examples():
    assert set_distance(UNIT, UNIT) == 0.0
    assert set_distance(UNIT, B(2, 0, 3, 1)) == pytest.approx(1.0)
    assert set_distance(UNIT, B(1, 0, 2, 1)) == 0.0


def test_hausdorff_examples():
    assert hausdorff_distance(UNIT, UNIT) == 0.0
    # sup over [0,1]^2 of the distance to [2,3]x[0,1] is attained on the left edge: 2
    assert hausdorff_distance(UNIT, B(2, 0, 3, 1)) == pytest.approx(2.0)
    g, _ = grid_points(UNIT, 101)
    assert points_polygon_distance(g, B(2, 0, 3, 1)).max() == pytest.approx(2.0)


def test_hausdorff_near_point():
    tiny = B(2, 2, 2 + 1e-6, 2 + 1e-6)
    far = max(math.dist((2, 2), v) for v in UNIT.vertices)
    assert hausdorff_distance(UNIT, tiny) == pytest.approx(far, abs=1e-5)
    assert point_hausdorff((2, 2), UNIT) == pytest.approx(far)


def test_polygons_intersect_examples():
    assert polygons_intersect(UNIT, B(0.5, 0.5, 2, 2))
    assert not polygons_intersect(UNIT, B(2, 2, 3, 3))
    assert polygons_intersect(UNIT, B(1, 0, 2, 1))
    assert polygons_intersect(B(0, 0, 3, 3), UNIT)  # containment


def test_jung_epsilon():
    assert jung_epsilon(2) == pytest.approx(math.pi * math.sqrt(1 / 3))
    assert jung_epsilon(1) == pytest.approx(math.pi / 2)
    assert jung_epsilon(10**6) == pytest.approx(math.pi / math.sqrt(2), rel=1e-6)
    with pytest.raises(ValueError):
        jung_epsilon(0)


seeds = st.integers(0, 2**32 - 1)


def _pair(seed):
    r = np.random.default_rng(seed)
    make = random_convex if r.random() < 0.6 else random_star
    a = make(r, 0, 0, r.uniform(0.5, 2))
    b = make(r, *r.uniform(-3, 3, 2), r.uniform(0.5, 2))
    return a, b


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_distance_properties(seed):
    a, b = _pair(seed)
    d = set_distance(a, b)
    assert d == pytest.approx(set_distance(b, a), abs=1e-9)
    assert d <= hausdorff_distance(a, b) + 1e-9
    assert (d == 0.0) == polygons_intersect(a, b)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_hausdorff_triangle_inequality(seed):
    r = np.random.default_rng(seed)
    a, b, c = (random_convex(r, *r.uniform(-3, 3, 2), r.uniform(0.3, 2)) for _ in range(3))
    assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-9


def test_distances_match_grid_oracle():
    """Analytic distances agree with a 200 x 200 grid estimate on 100 random pairs."""
    for seed in range(100):
        a, b = _pair(seed)
        ga, ha = grid_points(a)
        gb, hb = grid_points(b)
        da = points_polygon_distance(ga, b)
        db = points_polygon_distance(gb, a)
        # grid points are a subset of the sets: the estimates bracket the analytic values
        h = hausdorff_distance(a, b)
        d = set_distance(a, b)
        assert max(da.max(), db.max()) <= h + 1e-9
        assert h <= max(da.max(), db.max()) + max(ha, hb) + 1e-9
        assert d <= da.min() + 1e-9
        assert da.min() <= d + ha + 1e-9

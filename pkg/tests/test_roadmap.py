import math

import numpy as np
import pytest

from angelic.geometry import Polygon, Workspace, segment_collides
from angelic.roadmap import (
    RNG_NAME,
    Roadmap,
    RoadmapConfig,
    astar_search,
    connect_radius,
    dijkstra,
    gamma_threshold,
    prm_radius,
    sample_prm_star,
)

B = Polygon.box
EMPTY = Workspace(B(0, 0, 1, 1))


def test_radius_formula():
    assert connect_radius(RoadmapConfig(100, 2.0)) == pytest.approx(2 * math.sqrt(math.log(100) / 100))
    assert connect_radius(RoadmapConfig(100, 2.0)) == pytest.approx(0.42919, abs=1e-5)
    assert prm_radius(1.0, math.e, 1) == pytest.approx(1 / math.e)
    assert connect_radius(RoadmapConfig(1000, 2.0)) < connect_radius(RoadmapConfig(100, 2.0))


def test_default_gamma_exceeds_threshold():
    cfg = RoadmapConfig(100)
    assert connect_radius(cfg, 2.0) > prm_radius(gamma_threshold(2.0), 100, 2)


def test_config_validation():
    for bad in (dict(n=1), dict(n=10, gamma=0.0), dict(n=10, d=3)):
        with pytest.raises(ValueError):
            RoadmapConfig(**bad)


def test_complete_graph_with_huge_gamma():
    rm = sample_prm_star(EMPTY, RoadmapConfig(2, 100.0), [(0.1, 0.1), (0.9, 0.9)])
    assert len(rm) == 4
    assert len(rm.edges) == 6
    for i, j, c in rm.edges:
        assert c == pytest.approx(float(np.hypot(*(rm.points[i] - rm.points[j]))))


def test_deterministic():
    a = sample_prm_star(EMPTY, RoadmapConfig(200, seed=7))
    b = sample_prm_star(EMPTY, RoadmapConfig(200, seed=7))
    c = sample_prm_star(EMPTY, RoadmapConfig(200, seed=8))
    assert np.array_equal(a.points, b.points) and a.edges == b.edges
    assert not np.array_equal(a.points, c.points)
    assert RNG_NAME == "numpy.random.PCG64"


def test_edges_avoid_obstacles_and_respect_radius():
    ws = Workspace(B(0, 0, 2, 1), (B(0.95, 0, 1.05, 0.8),))
    rm = sample_prm_star(ws, RoadmapConfig(400, 1.0, seed=3), [(0.2, 0.2), (1.8, 0.2)])
    assert rm.edges
    for i, j, c in rm.edges:
        assert 0 < c <= rm.connect_radius + 1e-9
        assert not segment_collides(rm.points[i], rm.points[j], ws)
        assert i < j
    # the wall splits the bottom: any crossing edge must pass above it
    for i, j, _ in rm.edges:
        (x0, y0), (x1, y1) = rm.points[i], rm.points[j]
        if (x0 - 1) * (x1 - 1) < 0:
            t = (1 - x0) / (x1 - x0)
            assert y0 + t * (y1 - y0) >= 0.8 - 1e-9


def test_anchor_outside_free_space():
    ws = Workspace(B(0, 0, 2, 1), (B(0.5, 0, 1.5, 1),))
    with pytest.raises(ValueError):
        sample_prm_star(ws, RoadmapConfig(10), [(1.0, 0.5)])


def test_empty_free_space_rejected():
    # an obstacle covering all but a sliver: rejection sampling gives up
    ws = Workspace(B(0, 0, 1, 1), (Polygon.from_coords([(0, 0), (1, 0), (1, 1 - 1e-9), (0, 1)]),))
    with pytest.raises(ValueError):
        sample_prm_star(ws, RoadmapConfig(50))


def _line():
    return Roadmap(np.array([[0, 0], [1, 0], [3, 0]], float), ((0, 1, 1.0), (1, 2, 2.0)), 2.0)


def test_dijkstra_examples():
    rm = _line()
    assert dijkstra(rm, 0, lambda v: v == 2) == (3.0, [0, 1, 2])
    assert dijkstra(rm, 1, lambda v: v == 1) == (0.0, [1])
    cut = Roadmap(rm.points, ((0, 1, 1.0),), 2.0)
    assert dijkstra(cut, 0, lambda v: v == 2) == (math.inf, [])


def test_astar_matches_dijkstra(rng):
    ws = Workspace(B(0, 0, 4, 4), (B(1, 0, 1.5, 3), B(2.5, 1, 3, 4)))
    rm = sample_prm_star(ws, RoadmapConfig(300, seed=1), [(0.5, 0.5), (3.5, 3.5)])
    goal = lambda v: v == 1
    h = lambda v: float(np.hypot(*(rm.points[v] - rm.points[1])))
    trace = []
    a = astar_search(0, rm.neighbors, goal, h, trace)
    d, _ = dijkstra(rm, 0, goal)
    assert a.cost == pytest.approx(d, abs=1e-12)
    assert len(trace) == a.expanded
    assert sum(c for (i, j, c) in rm.edges if (i, j) in set(zip(a.path, a.path[1:])) | set(zip(a.path[1:], a.path))) == pytest.approx(a.cost)


def test_roadmap_dict_round_trip():
    rm = sample_prm_star(EMPTY, RoadmapConfig(30, seed=2))
    back = Roadmap.from_dict(rm.to_dict(), rm.config)
    assert np.array_equal(back.points, rm.points) and back.edges == rm.edges
    assert back.connect_radius == rm.connect_radius


def test_prm_star_convergence_smoke():
    """Shortest path from (0.1, 0.1) to (0.9, 0.9) in the empty unit square shrinks towards the straight line."""
    straight = math.hypot(0.8, 0.8)
    means = []
    for n in (50, 200, 800):
        costs = []
        for seed in range(10):
            rm = sample_prm_star(EMPTY, RoadmapConfig(n, seed=seed), [(0.1, 0.1), (0.9, 0.9)])
            costs.append(dijkstra(rm, 0, lambda v: v == 1)[0])
        means.append(np.mean(costs))
    assert means[0] >= means[1] >= means[2] >= straight
    assert means[2] <= 1.05 * straight

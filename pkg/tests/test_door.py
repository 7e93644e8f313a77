import dataclasses
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angelic.bundle import make_abstraction
from angelic.core import ConfigurationError
from angelic.domains.door import (
    Door,
    DoorAbstraction,
    DoorPuzzle,
    EffectGraph,
    InfeasibleError,
    corridor_door_puzzle,
    mst_lower_bound,
    required_switches,
)
from angelic.domains.nav import Region, RegionDecomposition
from angelic.fixtures import load_fixture
from angelic.geometry import Point2, Polygon, Workspace
from angelic.roadmap import RoadmapConfig, astar_search
from angelic.search import SearchConfig, search

B = Polygon.box


def test_mst_examples():
    tri = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], float)
    assert mst_lower_bound(EffectGraph(("a", "b", "c"), tri)) == 3.0
    assert mst_lower_bound(EffectGraph(("a",), np.zeros((1, 1)))) == 0.0
    zeros = np.zeros((3, 3))
    assert mst_lower_bound(EffectGraph(("a", "b", "c"), zeros)) == 0.0
    split = np.array([[0, 1, math.inf], [1, 0, math.inf], [math.inf, math.inf, 0]])
    assert mst_lower_bound(EffectGraph(("a", "b", "c"), split)) == math.inf


def test_effect_graph_validation():
    with pytest.raises(ValueError):
        EffectGraph(("a", "b"), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        EffectGraph(("a", "b"), np.array([[0, -1], [-1, 0]], float))
    g = EffectGraph(("a", "b"), np.array([[0, 5], [2, 0]], float))
    assert (g.weights == np.array([[0, 2], [2, 0]])).all()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_mst_below_every_tour(seed, n):
    """MST weight never exceeds the cheapest start-to-goal path through all nodes."""
    r = np.random.default_rng(seed)
    w = r.uniform(0, 10, (n, n))
    g = EffectGraph(tuple(range(n)), w)
    best = math.inf
    for perm in itertools.permutations(range(1, n - 1)):
        route = (0, *perm, n - 1)
        best = min(best, sum(g.weights[a, b] for a, b in zip(route, route[1:])))
    assert mst_lower_bound(g) <= best + 1e-9


def test_puzzle_validation():
    with pytest.raises(ConfigurationError):
        corridor_door_puzzle((0,), toggle_cost=0.0)
    with pytest.raises(ValueError):
        corridor_door_puzzle((0, 0))
    with pytest.raises(ValueError):
        corridor_door_puzzle((0, 1), switch_rooms=[0])


def test_required_switches():
    req = required_switches(corridor_door_puzzle((0,), roadmap_config=RoadmapConfig(100, None, 0)))
    assert req.required == {0} and not req.precedence
    # door order 0, 2, 1 with each switch in the room just before its door
    d = make_abstraction(load_fixture("door3"), 150, 0)
    req = required_switches(d)
    assert req.required == {0, 1, 2}
    assert req.precedence == {(0, 1), (0, 2), (2, 1)}


def test_infeasible_goal():
    ws = Workspace(B(0, 0, 4, 1), (B(1.9, 0, 2.1, 1),))
    regions = RegionDecomposition((Region("L", B(0, 0, 1.9, 1), True), Region("R", B(2.1, 0, 4, 1), True)))
    p = DoorPuzzle(ws, (), regions, Point2(0.5, 0.5), B(3, 0.2, 3.8, 0.8), RoadmapConfig(80, None, 0))
    with pytest.raises(InfeasibleError):
        DoorAbstraction(p)


@pytest.fixture(scope="module", params=["door1", "door2", "door3", "door4"])
def door(request):
    return make_abstraction(load_fixture(request.param), 150, 0)


def test_search_matches_product_dijkstra(door):
    truth = door.product_dijkstra().cost
    r = search(door, SearchConfig(mode="acyclic"))
    assert r.stats.cost == pytest.approx(truth)
    assert door.replay(r.plan) == pytest.approx(truth)
    a = door.astar()
    assert a.cost == pytest.approx(truth)
    assert door.replay(door.astar_ops(a.path)) == pytest.approx(truth)
    assert door.toggle_order(door.astar_ops(a.path)) == door.path_toggles(a.path)


def test_act_lower_bound_admissible(door):
    r = np.random.default_rng(0)
    n = len(door.roadmap)
    for v in [0, *r.integers(0, n, 8)]:
        for m in (0, (1 << door.n_doors) - 1, int(r.integers(0, 1 << door.n_doors))):
            truth = astar_search(
                (int(v), m),
                lambda x: (((w, mm), c) for w, mm, c in door._product_neighbors(*x)),
                lambda x: bool(door.goal_flags[x[0]]),
                lambda x: 0.0,
            ).cost
            assert door.act_lower(np.array([v]), m) <= truth + 1e-9


def test_replay_rejects_closed_door(door):
    a = door.product_dijkstra()
    moves = [o for o in door.astar_ops(a.path) if o.kind == "move"]
    with pytest.raises(ValueError):
        door.replay(moves)


def test_door_limit():
    with pytest.raises(ConfigurationError):
        corridor_door_puzzle(tuple(range(33)))


def _masked_distances(dom, mask, sources):
    """Roadmap distances using only edges passable with the given doors open."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    n = len(dom.roadmap)
    e = [(a, b, c) for a, b, c in dom.roadmap.edges if dom._passable(a, b, mask)]
    m = csr_matrix(([c for *_, c in e], ([a for a, *_ in e], [b for _, b, _ in e])), shape=(n, n))
    return dijkstra(m, directed=False, indices=sources)


def _mask_oracle_required(dom):
    """Door k is required iff the goal is unreachable under every mask that leaves k closed."""
    N = dom.n_doors
    goal = np.flatnonzero(dom.goal_flags)
    out = set()
    for k in range(N):
        if all(not np.isfinite(_masked_distances(dom, m, [0])[0][goal]).any()
               for m in range(1 << N) if not (m >> k) & 1):
            out.add(k)
    return out


def test_door_off_the_path_is_not_required():
    p = corridor_door_puzzle((1, 0), [0, 0], roadmap_config=RoadmapConfig(150, None, 0))
    # a third door standing in the open in the start room, switch nearby
    extra = Door(B(1.6, 3.0, 2.0, 3.4), Point2(1.0, 3.2))
    dom = DoorAbstraction(dataclasses.replace(p, doors=p.doors + (extra,)))
    assert required_switches(dom).required == {0, 1}
    assert _mask_oracle_required(dom) == {0, 1}


def test_required_matches_mask_oracle(door):
    assert required_switches(door).required == _mask_oracle_required(door)


def test_relaxation_is_monotone_in_open_doors(door):
    N = door.n_doors
    dist = {m: _masked_distances(door, m, [0])[0] for m in range(1 << N)}
    for m in range(1 << N):
        for k in range(N):
            more = m | (1 << k)
            assert (dist[more] <= dist[m] + 1e-12).all()
    # all doors open gives the relaxed distances the bound uses
    full = (1 << N) - 1
    goal = np.flatnonzero(door.goal_flags)
    assert door.relax.goal_dist[0] == pytest.approx(_masked_distances(door, full, goal).min(axis=0)[0])


def test_act_lower_with_all_doors_open(door):
    full = (1 << door.n_doors) - 1
    for v in (0, 5, 17):
        assert door.act_lower(np.array([v]), full) == pytest.approx(door.relax.goal_dist[v])


def test_two_doors_match_order_enumeration():
    dom = make_abstraction(load_fixture("door2"), 150, 0)
    t = dom.toggle_cost
    goal = np.flatnonzero(dom.goal_flags)
    best = math.inf
    for a, b in ((0, 1), (1, 0)):
        sa, sb = dom.switch_vertex[a], dom.switch_vertex[b]
        leg1 = _masked_distances(dom, 0, [0])[0][sa]
        leg2 = _masked_distances(dom, 1 << a, [sa])[0][sb]
        leg3 = _masked_distances(dom, 3, [sb])[0][goal].min()
        best = min(best, leg1 + leg2 + leg3 + 2 * t)
    r = search(dom, SearchConfig(mode="acyclic"))
    assert r.stats.cost == pytest.approx(best)


@pytest.mark.parametrize("name", ["door_fig1", "door_fig6"])
def test_mst_below_permutation_oracle_large(name):
    dom = make_abstraction(load_fixture(name))
    g = dom.effect_graph(np.array([0]), 0)
    n = len(g.nodes)
    assert n - 2 == dom.n_doors
    best = min(
        sum(g.weights[x, y] for x, y in zip(route, route[1:]))
        for perm in itertools.permutations(range(1, n - 1))
        for route in [(0, *perm, n - 1)]
    )
    assert mst_lower_bound(g) <= best + 1e-9

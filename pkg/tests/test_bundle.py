import copy
import json

import pytest

from angelic.bundle import (
    E_COVERAGE,
    E_DOORS,
    E_NUMERIC,
    E_PARSE,
    E_PLACEMENT,
    E_POLYGON,
    E_SCHEMA,
    BundleError,
    bundle_from_dict,
    bundle_to_dict,
    dumps,
    load_problem,
    loads,
    make_abstraction,
    save_problem,
    with_roadmap,
)
from angelic.fixtures import BUILDERS, fixture_names, fixture_text, load_fixture


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_fixture_round_trip(name):
    text = fixture_text(name)
    b = loads(text)
    assert b.name == name
    assert dumps(b) + "\n" == text


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_builders_match_bundled_files(name):
    assert dumps(BUILDERS[name]()) + "\n" == fixture_text(name)


def test_fixture_names():
    assert set(fixture_names()) == set(BUILDERS)


def test_save_and_load(tmp_path):
    b = load_fixture("corridor4")
    save_problem(b, tmp_path / "c.json")
    assert dumps(load_problem(tmp_path / "c.json")) == dumps(b)


def _base(name="corridor4"):
    return json.loads(fixture_text(name))


def _code(d):
    with pytest.raises(BundleError) as e:
        bundle_from_dict(d)
    return e.value.code


def test_parse_errors():
    with pytest.raises(BundleError) as e:
        loads("")
    assert e.value.code == E_PARSE
    with pytest.raises(BundleError) as e:
        loads('{\n "schema": \n}')
    assert e.value.code == E_PARSE and e.value.line == 3
    assert "line 3" in str(e.value)


def test_schema_errors():
    assert _code([]) == E_SCHEMA
    d = _base()
    d["schema"] = "angelic-problem/0"
    assert _code(d) == E_SCHEMA
    d = _base()
    d["kind"] = "maze"
    assert _code(d) == E_SCHEMA
    d = _base()
    del d["start"]
    assert _code(d) == E_SCHEMA
    d = _base()
    d["colour"] = "red"
    assert _code(d) == E_SCHEMA
    d = _base()
    d["roadmap"]["k"] = 3
    assert _code(d) == E_SCHEMA
    d = _base()
    d["regions"][1]["id"] = d["regions"][0]["id"]
    assert _code(d) == E_SCHEMA


def test_numeric_errors():
    d = _base()
    d["start"] = [1.0, "x"]
    assert _code(d) == E_NUMERIC
    d = _base()
    d["roadmap"]["n"] = 1
    assert _code(d) == E_NUMERIC
    d = _base()
    d["roadmap"]["gamma"] = -2.0
    assert _code(d) == E_NUMERIC
    d = _base()
    d["start"] = [1.0, True]
    assert _code(d) == E_NUMERIC
    d = _base("door1")
    d["toggle_cost"] = 0
    assert _code(d) == E_NUMERIC


def test_polygon_errors():
    d = _base()
    d["goal"] = [[0, 0], [2, 2], [2, 0], [0, 2]]
    assert _code(d) == E_POLYGON
    d = _base()
    d["workspace"]["obstacles"].append([[9, 9], [12, 9], [12, 12]])
    assert _code(d) == E_POLYGON


def test_coverage_error():
    d = _base()
    d["regions"] = d["regions"][:2]
    assert _code(d) == E_COVERAGE
    # skipping validation accepts it
    assert bundle_from_dict(d, validate=False).kind == "nav"


def test_placement_errors():
    d = _base()
    d["start"] = [3.0, 3.0]  # inside the first wall
    assert _code(d) == E_PLACEMENT
    d = _base()
    d["goal"] = [[2.5, 1], [3.5, 1], [3.5, 2], [2.5, 2]]
    assert _code(d) == E_PLACEMENT
    d = _base("door1")
    d["doors"][0]["switch"] = [4.0, 0.5]
    assert _code(d) == E_PLACEMENT


def test_door_limit():
    d = _base("door1")
    d["doors"] = [copy.deepcopy(d["doors"][0]) for _ in range(33)]
    assert _code(d) == E_DOORS


def test_flat_bundles():
    d = {"schema": "angelic-problem/1", "kind": "flat", "generator": {"seed": 3, "n_max": 10}}
    b = bundle_from_dict(d)
    assert bundle_to_dict(bundle_from_dict(bundle_to_dict(b))) == bundle_to_dict(b)
    d["start"] = 0
    assert _code(d) == E_SCHEMA
    g = {
        "schema": "angelic-problem/1",
        "kind": "flat",
        "start": "a",
        "graph": {"vertices": ["a", "b"], "edges": [["a", "b", 1.5]], "goal": "b", "heuristic": {"a": 1.0}},
    }
    b = bundle_from_dict(g)
    assert b.problem.graph.shortest_cost("a") == 1.5
    g["graph"]["edges"] = [["a", "zz", 1.0]]
    with pytest.raises(BundleError):
        bundle_from_dict(g)


def test_frozen_roadmap_round_trip():
    b = with_roadmap(load_fixture("corridor4"), 60, 0)
    d = bundle_to_dict(b)
    assert "frozen_roadmap" not in d
    dom = make_abstraction(b)
    frozen = bundle_to_dict(load_fixture("corridor4"))
    frozen["roadmap"]["n"] = 60
    frozen["frozen_roadmap"] = dom.roadmap.to_dict()
    b2 = bundle_from_dict(frozen)
    assert dumps(bundle_from_dict(bundle_to_dict(b2))) == dumps(b2)
    dom2 = make_abstraction(b2)
    assert dom2.dijkstra_cost() == pytest.approx(dom.dijkstra_cost())
    bad = copy.deepcopy(frozen)
    bad["frozen_roadmap"]["edges"].append([0, 10**6, 1.0])
    assert _code(bad) == E_SCHEMA


def test_with_roadmap_overrides():
    b = load_fixture("corridor4")
    b2 = with_roadmap(b, 77, 5)
    assert b2.roadmap_config.n == 77 and b2.roadmap_config.seed == 5
    assert b.roadmap_config.n == 500

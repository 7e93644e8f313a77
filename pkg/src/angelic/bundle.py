"""Problem bundles: JSON files describing one planning problem of any domain.

A bundle is a JSON object with a ``schema`` tag, a ``kind`` (flat, nav, door
or explicit), a ``name`` and the sections for that kind.  Loading validates
everything it can and reports failures as BundleError with a diagnostic code
and the offending section.  See docs/bundle_schema.md for the field list.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .core import ConfigurationError
from .domains.door import MAX_DOORS, Door, DoorAbstraction, DoorPuzzle
from .domains.explicit import ExplicitAbstraction, explicit_from_dict, explicit_to_dict
from .domains.flat import ExplicitGraph, FlatAbstraction, random_graph
from .domains.nav import CoverageError, NavAbstraction, NavProblem, Region, RegionDecomposition
from .geometry import GeometryError, Point2, Polygon, Workspace
from .roadmap import Roadmap, RoadmapConfig

SCHEMA = "angelic-problem/1"
KINDS = ("flat", "nav", "door", "explicit")

# diagnostic codes
E_PARSE = "E100-parse"
E_SCHEMA = "E101-schema"
E_NUMERIC = "E102-numeric"
E_POLYGON = "E103-polygon"
E_COVERAGE = "E104-coverage"
E_DOORS = "E105-door-limit"
E_PLACEMENT = "E106-placement"


class BundleError(ValueError):
    def __init__(self, code: str, section: str, message: str, line: int | None = None):
        self.code, self.section, self.line = code, section, line
        where = section + (f" (line {line})" if line is not None else "")
        super().__init__(f"{code} in {where}: {message}")


@dataclass(frozen=True)
class FlatProblem:
    graph: ExplicitGraph
    start: Any
    generator: dict | None = None


@dataclass(frozen=True)
class ProblemBundle:
    kind: str
    name: str
    problem: Any
    description: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def roadmap_config(self) -> RoadmapConfig | None:
        return getattr(self.problem, "roadmap_config", None)


# -- field readers ------------------------------------------------------------
def _keys(d: Any, section: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(d, dict):
        raise BundleError(E_SCHEMA, section, "expected an object")
    missing = required - d.keys()
    if missing:
        raise BundleError(E_SCHEMA, section, f"missing field(s) {sorted(missing)}")
    unknown = d.keys() - required - optional
    if unknown:
        raise BundleError(E_SCHEMA, section, f"unknown field(s) {sorted(unknown)}")
    return d


def _num(x: Any, section: str, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise BundleError(E_NUMERIC, section, f"expected a number, got {x!r}")
    v = float(x)
    if not math.isfinite(v):
        raise BundleError(E_NUMERIC, section, f"non-finite number {x!r}")
    if positive and not v > 0:
        raise BundleError(E_NUMERIC, section, f"expected a positive number, got {x!r}")
    if nonneg and v < 0:
        raise BundleError(E_NUMERIC, section, f"expected a nonnegative number, got {x!r}")
    return v


def _int(x: Any, section: str, lo: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise BundleError(E_NUMERIC, section, f"expected an integer, got {x!r}")
    if lo is not None and x < lo:
        raise BundleError(E_NUMERIC, section, f"expected an integer >= {lo}, got {x}")
    return x


def _point(x: Any, section: str) -> Point2:
    if not isinstance(x, list) or len(x) != 2:
        raise BundleError(E_NUMERIC, section, "a point is a list [x, y]")
    return Point2(_num(x[0], section), _num(x[1], section))


def _polygon(x: Any, section: str) -> Polygon:
    if not isinstance(x, list):
        raise BundleError(E_POLYGON, section, "a polygon is a list of [x, y] vertices")
    pts = [_point(p, f"{section}[{i}]") for i, p in enumerate(x)]
    try:
        return Polygon.from_coords(pts)
    except GeometryError as e:
        raise BundleError(E_POLYGON, section, str(e)) from None


def _pt_out(v: Point2) -> list:
    return [float(v.x), float(v.y)]


def _poly_out(p: Polygon) -> list:
    return [_pt_out(v) for v in p.vertices]


def _roadmap_config(d: Any, section: str) -> RoadmapConfig:
    _keys(d, section, {"n"}, {"gamma", "seed"})
    n = _int(d["n"], f"{section}.n", lo=2)
    gamma = d.get("gamma")
    gamma = None if gamma is None else _num(gamma, f"{section}.gamma", positive=True)
    seed = _int(d.get("seed", 0), f"{section}.seed", lo=0)
    return RoadmapConfig(n, gamma, seed)


def _workspace(d: Any, section: str) -> Workspace:
    _keys(d, section, {"bounds"}, {"obstacles"})
    bounds = _polygon(d["bounds"], f"{section}.bounds")
    obs = d.get("obstacles", [])
    if not isinstance(obs, list):
        raise BundleError(E_SCHEMA, f"{section}.obstacles", "expected a list")
    obstacles = tuple(_polygon(o, f"{section}.obstacles[{i}]") for i, o in enumerate(obs))
    try:
        return Workspace(bounds, obstacles)
    except GeometryError as e:
        raise BundleError(E_POLYGON, section, str(e)) from None


def _regions(d: Any, section: str) -> RegionDecomposition:
    if not isinstance(d, list) or not d:
        raise BundleError(E_SCHEMA, section, "expected a nonempty list of regions")
    regs = []
    for i, r in enumerate(d):
        sec = f"{section}[{i}]"
        _keys(r, sec, {"id", "polygon"}, {"convex"})
        if not isinstance(r["id"], str) or not r["id"]:
            raise BundleError(E_SCHEMA, f"{sec}.id", "region id must be a nonempty string")
        convex = r.get("convex", False)
        if not isinstance(convex, bool):
            raise BundleError(E_SCHEMA, f"{sec}.convex", "expected true or false")
        regs.append(Region(r["id"], _polygon(r["polygon"], f"{sec}.polygon"), convex))
    try:
        return RegionDecomposition(tuple(regs))
    except ValueError as e:
        raise BundleError(E_SCHEMA, section, str(e)) from None


def _frozen_roadmap(d: Any, section: str, cfg: RoadmapConfig) -> Roadmap:
    _keys(d, section, {"vertices", "edges", "connect_radius"})
    try:
        verts = np.asarray(d["vertices"], dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or not np.isfinite(verts).all():
            raise ValueError
        for e in d["edges"]:
            _int(e[0], f"{section}.edges", 0)
            _int(e[1], f"{section}.edges", 0)
            _num(e[2], f"{section}.edges", positive=True)
            if max(e[0], e[1]) >= len(verts):
                raise BundleError(E_SCHEMA, f"{section}.edges", f"edge {e[:2]} names a missing vertex")
    except BundleError:
        raise
    except (ValueError, TypeError, IndexError):
        raise BundleError(E_NUMERIC, section, "vertices must be finite [x, y] pairs and edges [i, j, cost]") from None
    return Roadmap.from_dict({**d, "connect_radius": _num(d["connect_radius"], f"{section}.connect_radius", positive=True)}, cfg)


def _check_free(ws: Workspace, p: Point2, section: str) -> None:
    if not ws.is_free(p):
        raise BundleError(E_PLACEMENT, section, f"point ({p.x:g}, {p.y:g}) is not in free space")


def _check_coverage(decomp: RegionDecomposition, ws: Workspace, goal: Polygon, validate: bool) -> None:
    if not validate:
        return
    try:
        decomp.validate_coverage(ws, extra=(goal,))
    except CoverageError as e:
        raise BundleError(E_COVERAGE, "regions", str(e)) from None


# -- per-kind loaders ---------------------------------------------------------
_NAV_FIELDS = {"workspace", "regions", "start", "goal", "roadmap"}
_NAV_OPTIONAL = {"frozen_roadmap", "goal_anchor"}


def _load_nav(d: dict, validate: bool) -> NavProblem:
    ws = _workspace(d["workspace"], "workspace")
    decomp = _regions(d["regions"], "regions")
    start = _point(d["start"], "start")
    goal = _polygon(d["goal"], "goal")
    cfg = _roadmap_config(d["roadmap"], "roadmap")
    _check_free(ws, start, "start")
    anchor = _point(d["goal_anchor"], "goal_anchor") if "goal_anchor" in d else None
    if anchor is not None:
        _check_free(ws, anchor, "goal_anchor")
    rm = _frozen_roadmap(d["frozen_roadmap"], "frozen_roadmap", cfg) if "frozen_roadmap" in d else None
    _check_coverage(decomp, ws, goal, validate)
    p = NavProblem(ws, decomp, start, goal, cfg, rm, anchor)
    try:
        p.anchor()
    except ValueError as e:
        raise BundleError(E_PLACEMENT, "goal", str(e)) from None
    return p


def _load_door(d: dict, validate: bool) -> DoorPuzzle:
    nav = _load_nav({k: v for k, v in d.items() if k in _NAV_FIELDS | _NAV_OPTIONAL}, validate=False)
    doors_raw = d["doors"]
    if not isinstance(doors_raw, list):
        raise BundleError(E_SCHEMA, "doors", "expected a list")
    if len(doors_raw) > MAX_DOORS:
        raise BundleError(E_DOORS, "doors", f"{len(doors_raw)} doors; at most {MAX_DOORS} are supported")
    doors = []
    for i, x in enumerate(doors_raw):
        sec = f"doors[{i}]"
        _keys(x, sec, {"polygon", "switch"})
        sw = _point(x["switch"], f"{sec}.switch")
        _check_free(nav.workspace, sw, f"{sec}.switch")
        doors.append(Door(_polygon(x["polygon"], f"{sec}.polygon"), sw))
    tc = _num(d.get("toggle_cost", 1.0), "toggle_cost", positive=True)
    _check_coverage(nav.decomposition, nav.workspace, nav.goal, validate)
    try:
        return DoorPuzzle(nav.workspace, tuple(doors), nav.decomposition, nav.start, nav.goal, nav.roadmap_config,
                          nav.roadmap, tc, nav.goal_anchor)
    except ConfigurationError as e:
        raise BundleError(E_DOORS, "doors", str(e)) from None


def _load_flat(d: dict) -> FlatProblem:
    if "generator" in d:
        if "graph" in d or "start" in d:
            raise BundleError(E_SCHEMA, "generator", "give either a generator or a graph with a start, not both")
        g = _keys(d["generator"], "generator", {"seed"}, {"n_max"})
        seed = _int(g["seed"], "generator.seed", 0)
        n_max = _int(g.get("n_max", 50), "generator.n_max", 2)
        graph, start = random_graph(np.random.default_rng(seed), n_max)
        return FlatProblem(graph, start, {"seed": seed, "n_max": n_max})
    if "graph" not in d or "start" not in d:
        raise BundleError(E_SCHEMA, "graph", "flat bundles need a generator or a graph and a start")
    g = _keys(d["graph"], "graph", {"vertices", "edges", "goal"}, {"heuristic"})
    if not isinstance(g["vertices"], list):
        raise BundleError(E_SCHEMA, "graph.vertices", "expected a list")
    edges = []
    for i, e in enumerate(g["edges"]):
        if not isinstance(e, list) or len(e) != 3:
            raise BundleError(E_SCHEMA, f"graph.edges[{i}]", "an edge is [from, to, cost]")
        edges.append((e[0], e[1], _num(e[2], f"graph.edges[{i}]", nonneg=True)))
    h = g.get("heuristic", {})
    if not isinstance(h, dict):
        raise BundleError(E_SCHEMA, "graph.heuristic", "expected an object")
    names = {str(v): v for v in g["vertices"]}
    heur = {names.get(k, k): _num(v, f"graph.heuristic.{k}", nonneg=True) for k, v in h.items()}
    try:
        graph = ExplicitGraph(tuple(g["vertices"]), tuple(edges), g["goal"], heur)
    except ValueError as e:
        raise BundleError(E_SCHEMA, "graph", str(e)) from None
    if d["start"] not in graph.index:
        raise BundleError(E_PLACEMENT, "start", f"start {d['start']!r} is not a vertex")
    return FlatProblem(graph, d["start"])


def bundle_from_dict(d: Any, validate: bool = True) -> ProblemBundle:
    if not isinstance(d, dict):
        raise BundleError(E_SCHEMA, "<root>", "a bundle is a JSON object")
    if d.get("schema") != SCHEMA:
        raise BundleError(E_SCHEMA, "schema", f"expected {SCHEMA!r}, got {d.get('schema')!r}")
    kind = d.get("kind")
    if kind not in KINDS:
        raise BundleError(E_SCHEMA, "kind", f"kind must be one of {KINDS}, got {kind!r}")
    common = {"schema", "kind", "name", "description"}
    name = d.get("name", "")
    desc = d.get("description", "")
    if not isinstance(name, str) or not isinstance(desc, str):
        raise BundleError(E_SCHEMA, "name", "name and description must be strings")
    if kind == "flat":
        _keys(d, "<root>", {"schema", "kind"}, common | {"graph", "start", "generator"})
        problem = _load_flat(d)
    elif kind == "nav":
        _keys(d, "<root>", {"schema", "kind"} | _NAV_FIELDS, common | _NAV_OPTIONAL)
        problem = _load_nav(d, validate)
    elif kind == "door":
        _keys(d, "<root>", {"schema", "kind", "doors"} | _NAV_FIELDS, common | _NAV_OPTIONAL | {"toggle_cost"})
        problem = _load_door(d, validate)
    else:
        _keys(d, "<root>", {"schema", "kind", "abstraction"}, common)
        try:
            problem = explicit_from_dict(d["abstraction"])
        except (KeyError, TypeError) as e:
            raise BundleError(E_SCHEMA, "abstraction", f"malformed explicit abstraction: {e}") from None
        except ValueError as e:
            raise BundleError(E_SCHEMA, "abstraction", str(e)) from None
    return ProblemBundle(kind, name, problem, desc)


def bundle_to_dict(b: ProblemBundle) -> dict:
    out: dict = {"schema": SCHEMA, "kind": b.kind, "name": b.name}
    if b.description:
        out["description"] = b.description
    p = b.problem
    if b.kind == "flat":
        if p.generator is not None:
            out["generator"] = dict(p.generator)
        else:
            g = p.graph
            out["graph"] = {
                "vertices": list(g.vertices),
                "edges": [[a, c, w] for a, c, w in g.edges],
                "goal": g.goal,
                "heuristic": {str(k): v for k, v in g.heuristic.items() if v},
            }
            out["start"] = p.start
        return out
    if b.kind == "explicit":
        out["abstraction"] = explicit_to_dict(p)
        return out
    ws = p.workspace
    out["workspace"] = {"bounds": _poly_out(ws.bounds), "obstacles": [_poly_out(o) for o in ws.obstacles]}
    out["regions"] = [{"id": r.id, "polygon": _poly_out(r.polygon), "convex": r.convex} for r in p.decomposition.regions]
    out["start"] = _pt_out(p.start)
    out["goal"] = _poly_out(p.goal)
    cfg = p.roadmap_config
    out["roadmap"] = {"n": cfg.n, "gamma": cfg.gamma, "seed": cfg.seed}
    if p.goal_anchor is not None:
        out["goal_anchor"] = _pt_out(p.goal_anchor)
    if p.roadmap is not None:
        out["frozen_roadmap"] = p.roadmap.to_dict()
    if b.kind == "door":
        out["doors"] = [{"polygon": _poly_out(d.polygon), "switch": _pt_out(d.switch)} for d in p.doors]
        out["toggle_cost"] = float(p.toggle_cost)
    return out


def with_roadmap(b: ProblemBundle, samples: int | None = None, seed: int | None = None) -> ProblemBundle:
    """Same bundle with the roadmap sample count or seed overridden (a frozen roadmap is dropped)."""
    if b.kind not in ("nav", "door") or (samples is None and seed is None):
        return b
    cfg = b.problem.roadmap_config
    cfg = replace(cfg, n=cfg.n if samples is None else samples, seed=cfg.seed if seed is None else seed)
    return replace(b, problem=replace(b.problem, roadmap_config=cfg, roadmap=None))


def make_abstraction(b: ProblemBundle, samples: int | None = None, seed: int | None = None, validate: bool = False):
    """Instantiate the abstraction a bundle describes."""
    b = with_roadmap(b, samples, seed)
    p = b.problem
    if b.kind == "flat":
        return FlatAbstraction(p.graph, p.start)
    if b.kind == "nav":
        return NavAbstraction(p, validate=validate)
    if b.kind == "door":
        return DoorAbstraction(p, validate=validate)
    return p


def loads(text: str, validate: bool = True) -> ProblemBundle:
    if not text.strip():
        raise BundleError(E_PARSE, "<file>", "empty input")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise BundleError(E_PARSE, "<file>", e.msg, e.lineno) from None
    return bundle_from_dict(d, validate)


def dumps(b: ProblemBundle) -> str:
    return json.dumps(bundle_to_dict(b), indent=1)


def load_problem(path: str | Path, validate: bool = True) -> ProblemBundle:
    return loads(Path(path).read_text(), validate)


def save_problem(b: ProblemBundle, path: str | Path) -> None:
    Path(path).write_text(dumps(b) + "\n")

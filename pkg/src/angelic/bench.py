"""Benchmark runs: one MetricsRecord per (problem, algorithm, weight, seed)."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Any, Iterable, Iterator

import numpy as np

from .bundle import FlatProblem, ProblemBundle, make_abstraction
from .core import ConfigurationError
from .domains.door import DoorAbstraction, InfeasibleError
from .domains.flat import random_graph
from .search import AngelicSearch, SearchConfig

METRICS_SCHEMA = "angelic-metrics/1"
ALGOS = ("astar", "aa", "acyclic", "approx")
_MODE = {"aa": "angelic", "acyclic": "acyclic", "approx": "approximate"}
REPLAY_TOL = 1e-9


@dataclass
class MetricsRecord:
    problem: str
    kind: str
    algo: str
    weight: float
    seed: int | None
    n: int | None
    cost: float | None = None
    wall_time: float = 0.0
    build_time: float = 0.0
    plans_expanded: int = 0
    states_explored: int = 0
    terminated: str = "infeasible"
    solution: list[str] | None = None
    toggle_order: list[int] | None = None
    replay_cost: float | None = None
    error: str | None = None
    schema: str = METRICS_SCHEMA
    trace: list[dict] | None = field(default=None, repr=False)

    def as_dict(self, include_trace: bool = False) -> dict:
        d = asdict(self)
        if not include_trace:
            d.pop("trace")
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    def content(self) -> dict:
        """Fields that must match between identical runs (timings removed)."""
        d = self.as_dict()
        d.pop("wall_time")
        d.pop("build_time")
        return d


def _reseed(b: ProblemBundle, seed: int | None) -> ProblemBundle:
    if seed is None or b.kind != "flat" or b.problem.generator is None:
        return b
    n_max = b.problem.generator["n_max"]
    graph, start = random_graph(np.random.default_rng(seed), n_max)
    return replace(b, problem=FlatProblem(graph, start, {"seed": seed, "n_max": n_max}))


def run(
    bundle: ProblemBundle,
    algo: str,
    weight: float = 1.0,
    seed: int | None = None,
    samples: int | None = None,
    trace: bool = False,
    expansion_cap: int = 1_000_000,
    abstraction: Any = None,
) -> MetricsRecord:
    """Solve one problem with one algorithm.

    Bad algorithm/weight combinations raise ConfigurationError; an unreachable
    goal or hitting the expansion cap is reported in ``terminated``.  A
    prebuilt abstraction may be passed to skip roadmap construction.
    """
    if algo not in ALGOS:
        raise ConfigurationError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGOS)}")
    if weight > 1.0 and algo != "approx":
        raise ConfigurationError(f"weight {weight} > 1 needs --algo approx")
    cfg = None
    if algo != "astar":
        cfg = SearchConfig(mode=_MODE[algo], weight=weight, expansion_cap=expansion_cap, trace=trace)
    bundle = _reseed(bundle, seed)
    rec = MetricsRecord(bundle.name, bundle.kind, algo, float(weight), seed, None)
    t0 = time.perf_counter()
    try:
        dom = abstraction if abstraction is not None else make_abstraction(bundle, samples, seed)
    except InfeasibleError as e:
        rec.build_time = time.perf_counter() - t0
        rec.error = str(e)
        return rec
    rec.build_time = time.perf_counter() - t0
    rm = getattr(dom, "roadmap", None)
    rec.n = len(rm) if rm is not None else getattr(dom, "n", None) or len(getattr(dom, "names", ()))

    if algo == "astar":
        if not hasattr(dom, "astar"):
            raise ConfigurationError(f"no direct A* baseline for {bundle.kind} problems")
        tr: list | None = [] if trace else None
        t0 = time.perf_counter()
        a = dom.astar(tr)
        rec.wall_time = time.perf_counter() - t0
        rec.plans_expanded, rec.states_explored = a.expanded, a.touched
        rec.trace = tr
        ops = dom.astar_ops(a.path) if math.isfinite(a.cost) else None
        rec.terminated = "optimal" if ops is not None else "infeasible"
        cost = a.cost
    else:
        s = AngelicSearch(dom, cfg)
        r = s.run()
        st = r.stats
        rec.wall_time, rec.plans_expanded, rec.states_explored = st.wall_time, st.plans_expanded, st.states_explored
        rec.terminated = st.terminated
        rec.trace = r.trace if trace else None
        ops, cost = r.plan, st.cost
    if ops is not None:
        rec.cost = float(cost)
        rec.solution = [o.id for o in ops]
        if isinstance(dom, DoorAbstraction):
            rec.toggle_order = list(dom.toggle_order(ops))
        if hasattr(dom, "replay"):
            rec.replay_cost = float(dom.replay(ops))
            if abs(rec.replay_cost - rec.cost) > REPLAY_TOL * max(1.0, abs(rec.cost)):
                raise RuntimeError(f"replayed cost {rec.replay_cost} differs from reported {rec.cost}")
    return rec


def sweep(
    bundle: ProblemBundle,
    algos: Iterable[str],
    weights: Iterable[float] = (1.0,),
    n_values: Iterable[int | None] = (None,),
    seeds: Iterable[int | None] = (None,),
    trace: bool = False,
) -> Iterator[MetricsRecord]:
    """Cross product of runs in a fixed order (n, seed, algo, weight); failures become records."""
    algos, weights = list(algos), list(weights)
    for n in n_values:
        for seed in seeds:
            cache: dict = {}
            for algo in algos:
                for w in weights:
                    if w > 1.0 and algo != "approx":
                        continue
                    try:
                        if "dom" not in cache:
                            t0 = time.perf_counter()
                            cache["dom"] = make_abstraction(_reseed(bundle, seed), n, seed)
                            cache["build"] = time.perf_counter() - t0
                        rec = run(bundle, algo, w, seed, n, trace, abstraction=cache["dom"])
                        rec.build_time = cache["build"]
                    except InfeasibleError as e:
                        rec = MetricsRecord(bundle.name, bundle.kind, algo, float(w), seed, n, error=str(e))
                    except Exception as e:  # recorded in-stream, sweep continues
                        rec = MetricsRecord(bundle.name, bundle.kind, algo, float(w), seed, n,
                                            terminated="error", error=f"{type(e).__name__}: {e}")
                    yield rec


def write_records(records: Iterable[MetricsRecord], out: IO[str]) -> int:
    k = 0
    for rec in records:
        out.write(rec.to_json() + "\n")
        out.flush()
        k += 1
    return k

"""Best-first search over abstract plans: angelic, acyclic and approximate modes."""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    INF,
    Abstraction,
    ConfigurationError,
    Operator,
    PlanNode,
    SymbolicValuation,
    decompose,
    extend,
    upper_to,
    v_lower,
)

MODES = ("angelic", "acyclic", "approximate")


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "acyclic"
    weight: float = 1.0
    expansion_cap: int = 1_000_000
    positive_lower_bound_required: bool = True
    trace: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown search mode {self.mode!r}")
        if not self.weight >= 1.0:
            raise ConfigurationError("weight must be >= 1")
        if self.weight > 1.0 and self.mode != "approximate":
            raise ConfigurationError("weights above 1 need approximate mode")
        if self.expansion_cap < 1:
            raise ConfigurationError("expansion cap must be positive")


@dataclass
class SearchStats:
    cost: float = INF
    wall_time: float = 0.0
    plans_expanded: int = 0
    states_explored: int = 0
    terminated: str = "infeasible"

    def as_dict(self) -> dict:
        return {
            "cost": self.cost,
            "wall_time": self.wall_time,
            "plans_expanded": self.plans_expanded,
            "states_explored": self.states_explored,
            "terminated": self.terminated,
        }


@dataclass
class SearchResult:
    plan: list[Operator] | None
    stats: SearchStats
    trace: list[dict] = field(default_factory=list)
    node: PlanNode | None = None


def key(plan: PlanNode, w: float) -> float:
    """min(Key(pred) + w (L - L_pred), U) with Key(root) = 0, computed from scratch."""
    chain = [plan]
    while chain[-1].pred is not None:
        chain.append(chain[-1].pred)
    k = 0.0
    prev_l = 0.0
    for node in reversed(chain[:-1]):
        k = min(k + w * (node.lower - prev_l), node.upper)
        prev_l = node.lower
    return k


class BoundTable:
    """Per-extension join of primitive-prefix bounds, used as a weak-domination closed list."""

    def __init__(self):
        self._t: dict[tuple[str, ...], dict] = {}

    def dominated(self, ext: tuple[str, ...], node: PlanNode, strict: bool = False) -> bool:
        """Every tuple of node is matched by a stored upper bound no greater (strict: smaller)."""
        table = self._t.get(ext)
        if not table:
            return False
        rows = list(node.valuation)
        if not rows or not all(t.dst.is_singleton for t in rows):
            return False
        for t in rows:
            u = table.get((t.src, t.dst))
            if u is None or u > t.lower or (strict and u == t.lower):
                return False
        return True

    def commit(self, ext: tuple[str, ...], node: PlanNode) -> None:
        table = self._t.setdefault(ext, {})
        for t in node.valuation:
            old = table.get((t.src, t.dst), INF)
            if t.upper < old:
                table[(t.src, t.dst)] = t.upper

    def __len__(self) -> int:
        return len(self._t)


class Frontier:
    def __init__(self, approximate: bool):
        self.queue: list = []
        self.best_primitive: PlanNode | None = None
        self.best_cost = INF
        self.deferred: dict[int, list[tuple[Operator, ...]]] = {}
        self._deferred_seen: set = set()
        self.bound_table = BoundTable()
        self._counter = itertools.count()
        self._approximate = approximate

    def priority(self, node: PlanNode, goal_lower: float, goal_upper: float) -> tuple:
        head = node.key if self._approximate else goal_lower
        return (head, goal_upper, -node.base.depth, next(self._counter))

    def push(self, node: PlanNode, prio: tuple, goal_lower: float) -> None:
        heapq.heappush(self.queue, (prio, goal_lower, node))

    def pop(self):
        prio, goal_lower, node = heapq.heappop(self.queue)
        return node, prio, goal_lower

    def peek_priority(self) -> float:
        return self.queue[0][0][0]

    def defer(self, base: PlanNode, seq: tuple[Operator, ...]) -> None:
        sig = (base.serial, tuple(o.id for o in seq))
        if sig not in self._deferred_seen:
            self._deferred_seen.add(sig)
            self.deferred.setdefault(base.serial, []).append(seq)

    def __len__(self) -> int:
        return len(self.queue)


def terminate_check(frontier: Frontier) -> bool:
    """Best primitive plan strictly better than the frontier minimum."""
    if frontier.best_primitive is None or not frontier.queue:
        return False
    return frontier.best_cost < frontier.peek_priority()


class AngelicSearch:
    def __init__(self, abstraction: Abstraction, cfg: SearchConfig):
        if (
            cfg.mode == "angelic"
            and cfg.positive_lower_bound_required
            and abstraction.has_zero_lower_bounds
        ):
            raise ConfigurationError(
                "angelic mode needs strictly positive operator lower bounds; use acyclic or approximate"
            )
        self.abs = abstraction
        self.cfg = cfg
        self.w = cfg.weight
        self.frontier = Frontier(cfg.mode == "approximate")
        self.trace: list[dict] = []
        self._states: set = set()
        self._enqueued: set = set()
        self._valuations: dict[str, object] = {}
        self.reactivated = 0

    # -- helpers -------------------------------------------------------
    def _val(self, op: Operator):
        v = self._valuations.get(op.id)
        if v is None:
            v = self._valuations[op.id] = self.abs.valuation_of(op)
        return v

    def _goal_bounds(self, node: PlanNode) -> tuple[float, float]:
        V = node.valuation
        return v_lower(V, self.abs.start, self.abs.goal), upper_to(V, self.abs.start, self.abs.goal)

    def _touch(self, node: PlanNode) -> None:
        label = self.abs.concrete_label
        for d in node.valuation.dsts():
            if d.is_singleton:
                self._states.add(label(d.element))

    def _propagate(self, base: PlanNode, seq: Sequence[Operator], parent: PlanNode | None):
        """Chain seq onto base; None if infeasible or pruned by the bound table."""
        node = base
        pending = []
        ids = tuple(o.id for o in seq)
        for i, op in enumerate(seq):
            nxt = extend(node, op, self._val(op), parent)
            if not nxt.valuation:
                return None
            nxt.key = min(node.key + self.w * (nxt.lower - node.lower), nxt.upper)
            self._touch(nxt)
            if nxt.primitive_prefix:
                rest = ids[i + 1:]
                if self.frontier.bound_table.dominated(rest, nxt):
                    return None
                pending.append((rest, nxt))
            node = nxt
        return node, pending

    def _offer(self, node: PlanNode, pending) -> None:
        """Record a primitive solution or enqueue an abstract plan."""
        fr = self.frontier
        lo, up = self._goal_bounds(node)
        if lo == INF:
            return
        if node.primitive_prefix:
            if up < fr.best_cost:
                fr.best_cost = up
                fr.best_primitive = node
            for rest, n in pending:
                fr.bound_table.commit(rest, n)
            return
        if fr.best_cost < lo:
            return
        base, head, ext = decompose(node)
        sig = (base.serial, head.id, tuple(o.id for o in ext))
        if sig in self._enqueued:
            return
        self._enqueued.add(sig)
        for rest, n in pending:
            fr.bound_table.commit(rest, n)
        fr.push(node, fr.priority(node, lo, up), lo)

    # -- successors ----------------------------------------------------
    reactivate = True  # turned off only to demonstrate why deferred plans matter

    def successors(self, p: PlanNode) -> list:
        base, head, ext = decompose(p)
        acyclic_mode = self.cfg.mode != "angelic"
        out = []
        posts = base.valuation.dsts()
        for ref in self.abs.refine(head, posts):
            seq = tuple(ref) + ext
            res = self._propagate(base, seq, p)
            if res is None:
                continue
            node, pending = res
            if v_lower(node.valuation, self.abs.start, self.abs.goal) == INF:
                continue
            if acyclic_mode and not node.acyclic:
                self.frontier.defer(base, seq)
                continue
            out.append(res)
        if acyclic_mode and self.reactivate:
            pa = p
            seen = set()
            while pa.parent is not None:
                pa = pa.parent.base
                if pa.serial in seen:
                    break
                seen.add(pa.serial)
                for seq in self.frontier.deferred.get(pa.serial, ()):
                    res = self._propagate(base, seq, p)
                    if res is None:
                        continue
                    node, _ = res
                    if node.acyclic and v_lower(node.valuation, self.abs.start, self.abs.goal) < INF:
                        self.reactivated += 1
                        out.append(res)
        return out

    # -- main loop -----------------------------------------------------
    def run(self) -> SearchResult:
        t0 = time.perf_counter()
        stats = SearchStats()
        fr = self.frontier
        start, goal = self.abs.start, self.abs.goal
        root = PlanNode.root(start)
        self._touch(root)
        if start.subset_of(goal):
            stats.cost = 0.0
            stats.terminated = "optimal"
            stats.states_explored = len(self._states)
            stats.wall_time = time.perf_counter() - t0
            return SearchResult([], stats, [], root)
        res = self._propagate(root, (self.abs.act,), None)
        if res is not None:
            self._offer(*res)
        capped = False
        while fr.queue:
            if terminate_check(fr):
                break
            if stats.plans_expanded >= self.cfg.expansion_cap:
                capped = True
                break
            p, prio, lo = fr.pop()
            if fr.best_cost < lo:
                continue
            base, head, ext = decompose(p)
            if fr.bound_table.dominated((head.id,) + tuple(o.id for o in ext), base, strict=True):
                # a strictly cheaper plan with the same continuation was queued later
                continue
            stats.plans_expanded += 1
            if self.cfg.trace:
                self.trace.append(
                    {
                        "i": stats.plans_expanded - 1,
                        "serial": p.serial,
                        "parent": p.parent.serial if p.parent is not None else None,
                        "key": p.key,
                        "priority": prio[0],
                        "lower": lo,
                        "upper": prio[1],
                        "ops": [o.id for o in p.ops()],
                    }
                )
            for node, pending in self.successors(p):
                self._offer(node, pending)
        stats.wall_time = time.perf_counter() - t0
        stats.states_explored = len(self._states)
        if capped and not terminate_check(fr):
            stats.terminated = "cap"
            return SearchResult(None, stats, self.trace, None)
        best = fr.best_primitive
        if best is None:
            stats.terminated = "infeasible"
            return SearchResult(None, stats, self.trace, None)
        stats.cost = fr.best_cost
        stats.terminated = "w-optimal" if self.w > 1.0 else "optimal"
        return SearchResult(best.ops(), stats, self.trace, best)


def search(abstraction: Abstraction, cfg: SearchConfig | None = None) -> SearchResult:
    return AngelicSearch(abstraction, cfg or SearchConfig()).run()

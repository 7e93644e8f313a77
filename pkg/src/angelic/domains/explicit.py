"""Abstractions written out as tables: bound tuples and refinements per vertex.

Useful for micro-fixtures where the interesting behaviour comes from a
hand-picked set of bounds rather than from geometry.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Sequence

from ..core import INF, Abstraction, AbstractState, Operator, SymbolicValuation


@dataclass(frozen=True)
class ExplicitOp:
    id: str
    primitive: bool
    tuples: tuple[tuple[tuple[int, ...], tuple[int, ...], float, float], ...]
    refinements: dict  # vertex -> tuple of op-id sequences (abstract ops only)


class ExplicitAbstraction(Abstraction):
    def __init__(self, n: int, start: int, goal: Sequence[int], ops: Sequence[ExplicitOp], act: str = "Act"):
        self.n = n
        self.start = AbstractState.singleton(start)
        self.goal = AbstractState.of(goal, "G")
        self.specs = {o.id: o for o in ops}
        if act not in self.specs or self.specs[act].primitive:
            raise ValueError(f"top-level operator {act!r} missing or primitive")
        self.operators = {o.id: Operator(o.id, o.primitive, "explicit") for o in ops}
        self.act = self.operators[act]
        self._vals: dict[str, SymbolicValuation] = {}
        for o in ops:
            for src, dst, l, u in o.tuples:
                if not all(0 <= x < n for x in (*src, *dst)):
                    raise ValueError(f"{o.id}: tuple names a vertex outside 0..{n - 1}")
            if o.primitive:
                if o.refinements:
                    raise ValueError(f"primitive {o.id} cannot have refinements")
                if any(len(src) != 1 or len(dst) != 1 or l != u for src, dst, l, u in o.tuples):
                    raise ValueError(f"primitive {o.id} needs exact singleton tuples")
            for seqs in o.refinements.values():
                for seq in seqs:
                    for x in seq:
                        if x not in self.specs:
                            raise ValueError(f"{o.id}: refinement names unknown operator {x!r}")
        self.has_zero_lower_bounds = any(l == 0 for o in ops for *_, l, _ in o.tuples)

    def valuation_of(self, op: Operator) -> SymbolicValuation:
        v = self._vals.get(op.id)
        if v is None:
            spec = self.specs[op.id]
            v = self._vals[op.id] = SymbolicValuation(
                (AbstractState.of(src), AbstractState.of(dst), l, u) for src, dst, l, u in spec.tuples
            )
        return v

    def refine(self, op: Operator, posts: Sequence[AbstractState]):
        spec = self.specs[op.id]
        for s in posts:
            if not s.is_singleton:
                continue
            for seq in spec.refinements.get(s.element, ()):
                yield tuple(self.operators[x] for x in seq)

    def step(self, op_id: str, v: int) -> list[tuple[int, float]]:
        """Successors of a primitive from v."""
        spec = self.specs[op_id]
        return [(dst[0], l) for src, dst, l, _ in spec.tuples if src[0] == v]

    def oracle_cost(self, max_len: int = 12) -> float:
        """Cheapest primitive refinement of Act by exhaustive expansion of the refinement tree."""
        start = self.start.element
        counter = itertools.count()
        heap = [(0.0, next(counter), start, (self.act.id,))]
        seen = set()
        while heap:
            c, _, v, rest = heapq.heappop(heap)
            if not rest:
                if (self.goal.mask >> v) & 1:
                    return c
                continue
            if (v, rest) in seen or len(rest) > max_len:
                continue
            seen.add((v, rest))
            head, tail = rest[0], rest[1:]
            spec = self.specs[head]
            if spec.primitive:
                for w, cost in self.step(head, v):
                    heapq.heappush(heap, (c + cost, next(counter), w, tail))
            else:
                for seq in spec.refinements.get(v, ()):
                    heapq.heappush(heap, (c, next(counter), v, tuple(seq) + tail))
        return INF


def explicit_from_dict(d: dict) -> ExplicitAbstraction:
    ops = []
    for o in d["operators"]:
        tuples = tuple((tuple(t[0]), tuple(t[1]), float(t[2]), float(t[3]) if t[3] is not None else INF) for t in o["tuples"])
        refs = {int(k): tuple(tuple(seq) for seq in v) for k, v in o.get("refinements", {}).items()}
        ops.append(ExplicitOp(o["id"], bool(o["primitive"]), tuples, refs))
    return ExplicitAbstraction(int(d["n"]), int(d["start"]), tuple(d["goal"]), ops, d.get("act", "Act"))


def explicit_to_dict(a: ExplicitAbstraction) -> dict:
    ops = []
    for spec in a.specs.values():
        ops.append(
            {
                "id": spec.id,
                "primitive": spec.primitive,
                "tuples": [[list(s), list(t), l, None if u == INF else u] for s, t, l, u in spec.tuples],
                "refinements": {str(k): [list(seq) for seq in v] for k, v in spec.refinements.items()},
            }
        )
    return {"n": a.n, "start": a.start.element, "goal": list(a.goal.members()), "act": a.act.id, "operators": ops}


def cyclic_micro() -> ExplicitAbstraction:
    """The cheap route leaves X's target set and comes back through Y.

    X moves from 0 into {1, 2}: via 4 to 1 costs 1, straight to 2 costs 10,
    and the bound only says 1.  At the root, X;Y;Act promises nothing X does
    not already promise, so it is set aside as cyclic.  Once the prefix has
    stepped to 4, X;Y;Act is reconsidered there and leads to the optimum of 3.
    """
    ops = [
        ExplicitOp("e04", True, (((0,), (4,), 0.5, 0.5),), {}),
        ExplicitOp("e41", True, (((4,), (1,), 0.5, 0.5),), {}),
        ExplicitOp("e02", True, (((0,), (2,), 10.0, 10.0),), {}),
        ExplicitOp("e12", True, (((1,), (2,), 1.0, 1.0),), {}),
        ExplicitOp("e23", True, (((2,), (3,), 1.0, 1.0),), {}),
        ExplicitOp(
            "X", False, (((0,), (1, 2), 1.0, INF), ((4,), (1,), 0.5, 0.5)), {0: (("e04", "X"), ("e02",)), 4: (("e41",),)}
        ),
        ExplicitOp("Y", False, (((1,), (2,), 1.0, 1.0), ((2,), (2,), 0.0, 0.0)), {1: (("e12",),), 2: ((),)}),
        ExplicitOp(
            "Act",
            False,
            (((0,), (3,), 3.0, INF), ((4,), (3,), 2.5, INF), ((1,), (3,), 2.0, INF), ((2,), (3,), 1.0, 1.0)),
            {0: (("X", "Y", "Act"), ("X", "Act")), 2: (("e23",),)},
        ),
    ]
    return ExplicitAbstraction(5, 0, (3,), ops)

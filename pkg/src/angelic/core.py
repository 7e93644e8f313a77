"""Abstract states, symbolic valuation bounds, propagation and plan nodes.

Abstract states are sets over a finite enumeration of concrete states, stored
as Python int bitsets. A bound tuple (src, dst, l, u) promises:

  * l <= V(x, x') for every x in src and x' in dst, and
  * u >= V(x, x') for every x in src and x' in dst ("all pairs" upper),

unless a valuation is flagged as an *existential* one, in which case u only
promises that every x in src reaches *some* x' in dst at cost <= u.  Both
readings are closed under propagation.  v_upper (subset-qualified in both
arguments) is sound for the all-pairs reading; upper_to (dst contained in a
target) is sound for both.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

INF = math.inf


ANY = -1


class AbstractState:
    """Immutable set of concrete states; equality by membership.

    mask is a bitset over an enumeration of base states (graph vertices).
    tag optionally attaches a discrete component: None (no component), a
    specific nonnegative int (e.g. a door mask), or ANY (every value).  The
    state is then mask x {tag}, or mask x everything for ANY.
    """

    __slots__ = ("mask", "tag", "name", "_hash", "_members")

    def __init__(self, mask: int, name: str | None = None, tag: int | None = None):
        if mask < 0:
            raise ValueError("state mask must be nonnegative")
        self.mask = mask
        self.tag = tag
        if name is None:
            name = f"S{mask:x}" if mask < 1 << 64 else f"S#{mask.bit_count()}"
            if tag is not None:
                name += "/*" if tag == ANY else f"/{tag:b}"
        self.name = name
        self._hash = hash((mask, tag))
        self._members: tuple | None = None

    @classmethod
    def singleton(cls, x, name: str | None = None) -> "AbstractState":
        """x is a base index, or a (base index, tag) pair."""
        if isinstance(x, tuple):
            v, t = x
            return cls(1 << v, name if name is not None else f"{{{v}/{t:b}}}", t)
        return cls(1 << x, name if name is not None else f"{{{x}}}")

    @classmethod
    def of(cls, members: Iterable[int], name: str | None = None, tag: int | None = None) -> "AbstractState":
        m = 0
        for x in members:
            m |= 1 << int(x)
        return cls(m, name, tag)

    def with_tag(self, tag: int | None, name: str | None = None) -> "AbstractState":
        return AbstractState(self.mask, name, tag)

    def __eq__(self, other) -> bool:
        return isinstance(other, AbstractState) and self.mask == other.mask and self.tag == other.tag

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"AbstractState({self.name})"

    def __len__(self) -> int:
        if self.tag == ANY:
            raise ValueError("state with an unrestricted tag has no finite size")
        return self.mask.bit_count()

    def __contains__(self, x) -> bool:
        if isinstance(x, tuple):
            v, t = x
            if self.tag is None or (self.tag != ANY and self.tag != t):
                return False
        else:
            if self.tag is not None:
                return False
            v = x
        return (self.mask >> v) & 1 == 1

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_singleton(self) -> bool:
        m = self.mask
        return m != 0 and m & (m - 1) == 0 and self.tag != ANY

    @property
    def element(self):
        if not self.is_singleton:
            raise ValueError(f"{self.name} is not a singleton")
        v = self.mask.bit_length() - 1
        return v if self.tag is None else (v, self.tag)

    def base_members(self) -> tuple[int, ...]:
        """Indices set in mask, ignoring the tag."""
        m = self.mask
        if m == 0:
            return ()
        raw = np.frombuffer(m.to_bytes((m.bit_length() + 7) // 8, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        return tuple(int(i) for i in np.flatnonzero(bits))

    def members(self) -> tuple:
        if self._members is None:
            if self.tag == ANY:
                raise ValueError("state with an unrestricted tag cannot be enumerated")
            base = self.base_members()
            self._members = base if self.tag is None else tuple((v, self.tag) for v in base)
        return self._members

    def _tags_meet(self, other: "AbstractState") -> bool:
        a, b = self.tag, other.tag
        if a is None or b is None:
            return a is b
        return a == ANY or b == ANY or a == b

    def intersects(self, other: "AbstractState") -> bool:
        return self.mask & other.mask != 0 and self._tags_meet(other)

    def subset_of(self, other: "AbstractState") -> bool:
        if self.mask | other.mask != other.mask:
            return False
        a, b = self.tag, other.tag
        return a == b or (b == ANY and a is not None)

    def __and__(self, other: "AbstractState") -> "AbstractState":
        if self.tag != other.tag:
            raise ValueError("intersection of differently tagged states is not supported")
        return AbstractState(self.mask & other.mask, f"{self.name}&{other.name}", self.tag)

    def __or__(self, other: "AbstractState") -> "AbstractState":
        if self.tag != other.tag:
            raise ValueError("union of differently tagged states is not supported")
        return AbstractState(self.mask | other.mask, f"{self.name}|{other.name}", self.tag)


class BoundTuple(NamedTuple):
    src: AbstractState
    dst: AbstractState
    lower: float
    upper: float


def _merge(table: dict, key, l: float, u: float) -> None:
    old = table.get(key)
    if old is None:
        table[key] = (l, u)
    else:
        table[key] = (min(old[0], l), min(old[1], u))


class Valuation:
    """Anything propagation can compose with: answers summary(state)."""

    existential: bool = False

    def summary(self, s: AbstractState) -> dict[AbstractState, tuple[float, float]]:
        """dst -> (min lower over tuples whose src meets s, min upper over tuples with s inside src)."""
        raise NotImplementedError


class SymbolicValuation(Valuation):
    """Finite set of bound tuples, merged per (src, dst) with (min l, min u)."""

    __slots__ = ("_t", "_by_elem", "_multi", "_cache", "existential")

    def __init__(self, tuples: Iterable = (), existential: bool = False, prune: bool = True):
        table: dict[tuple[AbstractState, AbstractState], tuple[float, float]] = {}
        for t in tuples:
            src, dst, l, u = t
            if src.is_empty or dst.is_empty:
                raise ValueError("bound tuples need nonempty states")
            if not (l >= 0 and u >= l):
                raise ValueError(f"bad bound tuple ({src.name}, {dst.name}, {l}, {u})")
            _merge(table, (src, dst), float(l), float(u))
        self._init(table, existential, prune)

    @classmethod
    def _raw(cls, table: dict, existential: bool, prune: bool = True) -> "SymbolicValuation":
        v = cls.__new__(cls)
        v._init(table, existential, prune)
        return v

    def _init(self, table: dict, existential: bool, prune: bool) -> None:
        if prune and len(table) > 1:
            table = _prune_dominated(table)
        self._t = table
        self.existential = existential
        self._by_elem: dict[int, list[tuple[AbstractState, float, float]]] | None = None
        self._multi: list[tuple[AbstractState, AbstractState, float, float]] | None = None
        self._cache: dict[AbstractState, dict] = {}

    def _index(self) -> None:
        by_elem: dict[int, list] = {}
        multi = []
        for (src, dst), (l, u) in self._t.items():
            if src.is_singleton:
                by_elem.setdefault(src.element, []).append((dst, l, u))
            else:
                multi.append((src, dst, l, u))
        self._by_elem, self._multi = by_elem, multi

    def __iter__(self) -> Iterator[BoundTuple]:
        for (src, dst), (l, u) in self._t.items():
            yield BoundTuple(src, dst, l, u)

    def __len__(self) -> int:
        return len(self._t)

    def __bool__(self) -> bool:
        return bool(self._t)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolicValuation) and self._t == other._t

    def __repr__(self) -> str:
        body = ", ".join(f"({s.name},{d.name},{l:g},{u:g})" for (s, d), (l, u) in self._t.items())
        return f"V{{{body}}}"

    def as_dict(self) -> dict[tuple[AbstractState, AbstractState], tuple[float, float]]:
        return dict(self._t)

    def keys(self):
        return self._t.keys()

    def dsts(self) -> list[AbstractState]:
        return list(dict.fromkeys(d for _, d in self._t))

    def touching(self, s: AbstractState) -> Iterator[BoundTuple]:
        """Tuples whose src intersects s."""
        if self._by_elem is None:
            self._index()
        if s.is_singleton:
            e = s.element
            for dst, l, u in self._by_elem.get(e, ()):
                yield BoundTuple(s, dst, l, u)
        elif len(self._by_elem):
            if s.tag != ANY and len(s) <= len(self._by_elem):
                for e in s.members():
                    for dst, l, u in self._by_elem.get(e, ()):
                        yield BoundTuple(AbstractState.singleton(e), dst, l, u)
            else:
                for e, rows in self._by_elem.items():
                    if e in s:
                        for dst, l, u in rows:
                            yield BoundTuple(AbstractState.singleton(e), dst, l, u)
        for src, dst, l, u in self._multi:
            if src.intersects(s):
                yield BoundTuple(src, dst, l, u)

    def summary(self, s: AbstractState) -> dict[AbstractState, tuple[float, float]]:
        hit = self._cache.get(s)
        if hit is not None:
            return hit
        out: dict[AbstractState, tuple[float, float]] = {}
        for src, dst, l, u in self.touching(s):
            _merge(out, dst, l, u if s.subset_of(src) else INF)
        self._cache[s] = out
        return out

    @property
    def min_lower(self) -> float:
        return min((l for l, _ in self._t.values()), default=INF)

    @property
    def min_upper(self) -> float:
        return min((u for _, u in self._t.values()), default=INF)


EMPTY = SymbolicValuation()


def _prune_dominated(table: dict) -> dict:
    """Drop tuples beaten by a tuple with the same dst, a larger src and no worse bounds."""
    groups: dict[AbstractState, list] = {}
    for (src, dst), lu in table.items():
        groups.setdefault(dst, []).append((src, lu))
    if all(len(g) == 1 for g in groups.values()):
        return table
    out = {}
    for dst, rows in groups.items():
        # a singleton src contains no other src, so only wider srcs can dominate
        wide = [r for r in rows if not r[0].is_singleton]
        for src, (l, u) in rows:
            if not any(
                src2 != src and src.subset_of(src2) and l2 <= l and u2 <= u
                for src2, (l2, u2) in wide
            ):
                out[(src, dst)] = (l, u)
    return out


def v_lower(V: SymbolicValuation, s: AbstractState, s_prime: AbstractState) -> float:
    return min((t.lower for t in V.touching(s) if t.dst.intersects(s_prime)), default=INF)


def v_upper(V: SymbolicValuation, s: AbstractState, s_prime: AbstractState) -> float:
    return min(
        (t.upper for t in V.touching(s) if s.subset_of(t.src) and s_prime.subset_of(t.dst)),
        default=INF,
    )


def upper_to(V: SymbolicValuation, s: AbstractState, target: AbstractState) -> float:
    """Upper bound on reaching some state of target from every state of s."""
    return min(
        (t.upper for t in V.touching(s) if s.subset_of(t.src) and t.dst.subset_of(target)),
        default=INF,
    )


def dominates(
    Va: SymbolicValuation,
    Vb: SymbolicValuation,
    strict: bool = True,
    pairs: Iterable[tuple[AbstractState, AbstractState]] | None = None,
) -> bool:
    if pairs is None:
        pairs = list(dict.fromkeys(itertools.chain(Va.keys(), Vb.keys())))
    for s, s2 in pairs:
        lb = v_lower(Vb, s, s2)
        if lb == INF:
            continue
        ua = v_upper(Va, s, s2)
        if (ua >= lb) if strict else (ua > lb):
            return False
    return True


def propagate(Va: SymbolicValuation, Vb: Valuation) -> SymbolicValuation:
    """Bounds for Va followed by Vb."""
    out: dict = {}
    for (s, s2), (l, u) in Va._t.items():
        for dst, (lb, ub) in Vb.summary(s2).items():
            _merge(out, (s, dst), l + lb, u + ub)
    return SymbolicValuation._raw(out, Va.existential or Vb.existential)


def join(Va: SymbolicValuation, Vb: SymbolicValuation) -> SymbolicValuation:
    out = dict(Va._t)
    for k, (l, u) in Vb._t.items():
        _merge(out, k, l, u)
    return SymbolicValuation._raw(out, Va.existential or Vb.existential)


# --------------------------------------------------------------------------
# brute-force oracle over small explicit graphs


@dataclass(frozen=True)
class ToyGraph:
    n: int
    edges: tuple[tuple[int, int, float], ...]

    def out(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for a, b, c in self.edges:
            adj[a].append((b, c))
        return adj


@dataclass(frozen=True)
class ToyOperator:
    """All primitive paths staying inside `within` and ending in `ends`."""

    within: frozenset[int]
    ends: frozenset[int]
    allow_empty: bool = False


ENUMERATION_CAP = 10_000


def brute_force_valuation(op: ToyOperator, g: ToyGraph, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Exact table V[x, x'] by enumerating every simple path the operator allows."""
    adj = g.out()
    table = np.full((g.n, g.n), INF)
    count = 0
    for x in sorted(op.within):
        if op.allow_empty and x in op.ends:
            table[x, x] = 0.0
        stack = [(x, 0.0, 1 << x)]
        while stack:
            v, c, seen = stack.pop()
            for w, cw in adj[v]:
                if w not in op.within or (seen >> w) & 1:
                    continue
                count += 1
                if count > cap:
                    raise ValueError(f"universe too large: more than {cap} paths")
                nc = c + cw
                if w in op.ends and nc < table[x, w]:
                    table[x, w] = nc
                stack.append((w, nc, seen | (1 << w)))
    return table


def concat_table(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min-plus product: exact valuation of the concatenated operator."""
    return np.min(a[:, :, None] + b[None, :, :], axis=1)


def union_table(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.minimum(a, b)


def table_lower(table: np.ndarray, s: AbstractState, s2: AbstractState) -> float:
    """inf over x in s, x' in s2 of V(x, x')."""
    sub = table[np.ix_(s.members(), s2.members())]
    return float(sub.min()) if sub.size else INF


def table_upper(table: np.ndarray, s: AbstractState, s2: AbstractState) -> float:
    """sup over x in s of inf over x' in s2 of V(x, x')."""
    sub = table[np.ix_(s.members(), s2.members())]
    return float(sub.min(axis=1).max()) if sub.size else INF


def sound_valuation(
    table: np.ndarray,
    vocab: Sequence[AbstractState],
    rng: np.random.Generator,
    slack: float = 0.5,
) -> SymbolicValuation:
    """A random but admissible all-pairs bound for an exact table over a state vocabulary.

    Every finite entry of the table is covered by at least a singleton tuple.
    """
    rows = []
    for s, s2 in itertools.product(vocab, vocab):
        sub = table[np.ix_(s.members(), s2.members())]
        lo = float(sub.min())
        if lo == INF:
            continue
        hi = float(sub.max())
        l = lo * rng.uniform(1.0 - slack, 1.0)
        u = hi * rng.uniform(1.0, 1.0 + slack) if hi < INF and rng.random() < 0.7 else INF
        rows.append((s, s2, l, u))
    for x, y in zip(*np.nonzero(np.isfinite(table))):
        c = float(table[x, y])
        rows.append((AbstractState.singleton(int(x)), AbstractState.singleton(int(y)), c, c))
    return SymbolicValuation(rows)


# --------------------------------------------------------------------------
# operators and plan nodes


@dataclass(frozen=True)
class Operator:
    id: str
    is_primitive: bool = field(default=False, compare=False)
    kind: str = field(default="abstract", compare=False)
    data: Any = field(default=None, compare=False, repr=False)


class ConfigurationError(ValueError):
    pass


class PlanNode:
    """One operator appended to a predecessor plan; immutable once built."""

    __slots__ = (
        "op", "pred", "base", "valuation", "depth", "parent", "primitive_prefix",
        "dst_union", "lower", "upper", "key", "serial", "_acyclic",
    )
    _serials = itertools.count()

    def __init__(self, op, pred, valuation: SymbolicValuation, parent=None):
        self.op: Operator | None = op
        self.pred: PlanNode | None = pred
        self.valuation = valuation
        self.parent: PlanNode | None = parent
        self.serial = next(PlanNode._serials)
        if pred is None:
            self.depth = 0
            self.primitive_prefix = True
        else:
            self.depth = pred.depth + 1
            self.primitive_prefix = pred.primitive_prefix and op.is_primitive
        self.base: PlanNode = self if self.primitive_prefix else pred.base
        m = 0
        for _, d in valuation.keys():
            m |= d.mask
        self.dst_union = m
        self.lower = valuation.min_lower
        self.upper = valuation.min_upper
        self.key = 0.0
        self._acyclic: bool | None = None

    @classmethod
    def root(cls, start: AbstractState) -> "PlanNode":
        return cls(None, None, SymbolicValuation([(start, start, 0.0, 0.0)]))

    @property
    def is_root(self) -> bool:
        return self.pred is None

    def ops(self) -> list[Operator]:
        out = []
        n = self
        while n.pred is not None:
            out.append(n.op)
            n = n.pred
        return out[::-1]

    def prefixes(self) -> Iterator["PlanNode"]:
        """Proper prefixes, nearest first, ending with the root."""
        n = self.pred
        while n is not None:
            yield n
            n = n.pred

    def __repr__(self) -> str:
        return f"PlanNode({'∘'.join(o.id for o in self.ops()) or '∅'}, L={self.lower:g}, U={self.upper:g})"

    @property
    def acyclic(self) -> bool:
        if self._acyclic is None:
            chain = []
            n = self
            while n is not None and n._acyclic is None:
                chain.append(n)
                n = n.pred
            for node in reversed(chain):
                node._acyclic = (node.pred is None) or (node.pred._acyclic and not _has_dominating_prefix(node))
        return self._acyclic


def _has_dominating_prefix(p: PlanNode) -> bool:
    """Some proper prefix weakly dominates p pointwise.

    For each finite tuple (s, d, l) of p, every x' in d must be reached by a
    prefix tuple whose src contains s, whose dst contains x', and whose lower
    bound is at most l.
    """
    rows = [(t.src, t.dst, t.lower) for t in p.valuation if t.lower < INF]
    if not rows:
        return False
    for p0 in p.prefixes():
        u = p0.dst_union
        if any(d.mask & ~u for _, d, _ in rows):
            continue
        prev = list(p0.valuation)
        if all(_covered(prev, s, d, l) for s, d, l in rows):
            return True
    return False


def _covered(prev: list[BoundTuple], s: AbstractState, d: AbstractState, l: float) -> bool:
    need = d.mask
    for t in prev:
        if t.lower <= l and s.subset_of(t.src) and (t.dst.tag == d.tag or t.dst.tag == ANY):
            need &= ~t.dst.mask
            if not need:
                return True
    return False


def is_acyclic(plan: PlanNode) -> bool:
    return plan.acyclic


def extend(pred: PlanNode, op: Operator, val: Valuation, parent: PlanNode | None = None) -> PlanNode:
    return PlanNode(op, pred, propagate(pred.valuation, val), parent)


def decompose(plan: PlanNode) -> tuple[PlanNode, Operator | None, tuple[Operator, ...]]:
    """Split into (Base, Head, Ext); Head is None for a fully primitive plan."""
    if plan.is_root:
        raise ValueError("the root plan has no decomposition")
    base = plan.base
    tail = []
    n = plan
    while n is not base:
        tail.append(n.op)
        n = n.pred
    tail.reverse()
    if not tail:
        return base, None, ()
    return base, tail[0], tuple(tail[1:])


def recompose(base: PlanNode, head: Operator | None, ext: Sequence[Operator]) -> list[Operator]:
    return base.ops() + ([head] if head is not None else []) + list(ext)


# --------------------------------------------------------------------------
# abstraction interface


class Abstraction:
    """What the search consumes. Domains subclass and fill in the hooks."""

    start: AbstractState
    goal: AbstractState
    act: Operator
    has_zero_lower_bounds: bool = False

    def valuation_of(self, op: Operator) -> Valuation:
        raise NotImplementedError

    def refine(self, op: Operator, posts: Sequence[AbstractState]) -> Iterable[tuple[Operator, ...]]:
        raise NotImplementedError

    def concrete_label(self, element: int) -> Any:
        """Label used when counting distinct concrete states touched."""
        return element

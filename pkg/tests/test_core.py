import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angelic.core import (
    ANY,
    INF,
    AbstractState,
    Operator,
    PlanNode,
    SymbolicValuation,
    ToyGraph,
    ToyOperator,
    brute_force_valuation,
    concat_table,
    decompose,
    dominates,
    extend,
    is_acyclic,
    join,
    propagate,
    recompose,
    sound_valuation,
    table_lower,
    table_upper,
    union_table,
    upper_to,
    v_lower,
    v_upper,
)

from conftest import random_toy_domain

S = AbstractState.of
A, A2, Bs, C, D = S([0, 1]), S([1, 2]), S([3, 4]), S([5]), S([6])


# -- abstract states -----------------------------------------------------------
def test_state_relations():
    assert S([1]).subset_of(A) and not A.subset_of(S([1]))
    assert A.subset_of(A)
    assert A.intersects(A2) and not A.intersects(Bs)
    assert 1 in A and 2 not in A
    t = AbstractState(0b11, tag=5)
    assert (0, 5) in t and (0, 4) not in t and 0 not in t
    anyt = AbstractState(0b111, tag=ANY)
    assert t.subset_of(anyt) and not anyt.subset_of(t)
    assert t.intersects(anyt) and not t.intersects(A)
    assert AbstractState.singleton((3, 2)).element == (3, 2)


@settings(max_examples=200)
@given(st.integers(1, 255), st.integers(1, 255), st.integers(1, 255))
def test_state_relation_laws(a, b, c):
    x, y, z = AbstractState(a), AbstractState(b), AbstractState(c)
    assert x.subset_of(x)
    if x.subset_of(y) and y.subset_of(z):
        assert x.subset_of(z)
    if x.subset_of(y):
        assert x.intersects(y)
    for m in range(8):
        assert (m in x) == bool((a >> m) & 1)


# -- bounds ----------------------------------------------------------------------
def test_bound_tuple_validation():
    with pytest.raises(ValueError):
        SymbolicValuation([(A, Bs, 3, 2)])
    with pytest.raises(ValueError):
        SymbolicValuation([(A, AbstractState(0), 1, 2)])


def test_v_lower_examples():
    V = SymbolicValuation([(A, Bs, 2, 5)])
    assert v_lower(V, A, Bs) == 2
    assert v_lower(V, C, Bs) == INF
    V2 = SymbolicValuation([(A, Bs, 2, 5), (A2, Bs, 1, 9)])
    assert v_lower(V2, S([1]), Bs) == 1


def test_v_upper_examples():
    V = SymbolicValuation([(A, Bs, 2, 5)])
    assert v_upper(V, A, Bs) == 5
    assert v_upper(V, S([0, 7]), Bs) == INF
    B2 = S([3, 4, 8])
    V2 = SymbolicValuation([(A, Bs, 2, 5), (A, B2, 1, 3)])
    assert v_upper(V2, S([0]), S([3])) == 3


def test_upper_to():
    V = SymbolicValuation([(A, S([3]), 0, 4), (A, Bs, 0, 2)], existential=True)
    assert upper_to(V, S([0]), Bs) == 2
    assert upper_to(V, S([0]), S([3])) == 4
    assert upper_to(V, S([9]), Bs) == INF


def test_merge_on_insert():
    V = SymbolicValuation([(A, Bs, 1, 4), (A, Bs, 2, 3)])
    assert len(V) == 1 and list(V)[0][2:] == (1, 3)


def test_dominates_examples():
    Va = SymbolicValuation([(A, Bs, 1, 5)])
    Vb = SymbolicValuation([(A, Bs, 6, 9)])
    assert dominates(Va, Vb, strict=True)
    assert dominates(Va, SymbolicValuation(), strict=True)
    Vc = SymbolicValuation([(A, Bs, 5, 9)])
    assert not dominates(Va, Vc, strict=True)
    assert dominates(Va, Vc, strict=False)


def test_propagate_examples():
    Va = SymbolicValuation([(A, Bs, 1, 2)])
    assert propagate(Va, SymbolicValuation([(Bs, C, 3, 4)])).as_dict() == {(A, C): (4, 6)}
    B3 = S([4, 9])  # meets Bs without containing it
    assert propagate(Va, SymbolicValuation([(B3, C, 3, 9)])).as_dict() == {(A, C): (4, INF)}
    assert not propagate(Va, SymbolicValuation([(D, C, 3, 4)]))


def test_join_examples():
    V = SymbolicValuation([(A, Bs, 1, 4), (Bs, C, 2, 2)])
    assert join(V, SymbolicValuation()) == V
    assert join(SymbolicValuation([(A, Bs, 1, 4)]), SymbolicValuation([(A, Bs, 2, 3)])).as_dict() == {(A, Bs): (1, 3)}


def _random_valuation(r, vocab):
    rows = []
    for s, s2 in itertools.product(vocab, vocab):
        if r.random() < 0.3:
            l = float(r.integers(0, 10))
            rows.append((s, s2, l, l + float(r.integers(0, 5)) if r.random() < 0.7 else INF))
    return SymbolicValuation(rows)


VOCAB = [S([0]), S([1]), S([0, 1]), S([2]), S([1, 2])]
PAIRS = list(itertools.product(VOCAB, VOCAB))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_join_commutative_and_dominance_laws(seed):
    r = np.random.default_rng(seed)
    Va, Vb, Vc = (_random_valuation(r, VOCAB) for _ in range(3))
    assert join(Va, Vb) == join(Vb, Va)
    if any(v_lower(Va, s, s2) < INF for s, s2 in PAIRS):
        assert not dominates(Va, Va, True, PAIRS)
    if dominates(Va, Vb, True, PAIRS) and dominates(Vb, Vc, True, PAIRS):
        assert dominates(Va, Vc, True, PAIRS)


def test_pruning_keeps_queries():
    """Dropping dominated tuples never changes v_lower or v_upper."""
    r = np.random.default_rng(4)
    for _ in range(50):
        rows = list(_random_valuation(r, VOCAB))
        pruned = SymbolicValuation(rows)
        full = SymbolicValuation(rows, prune=False)
        for s, s2 in PAIRS:
            assert v_lower(pruned, s, s2) == v_lower(full, s, s2)
            assert v_upper(pruned, s, s2) == v_upper(full, s, s2)


# -- brute force oracle ---------------------------------------------------------
def test_brute_force_single_edge():
    g = ToyGraph(2, ((0, 1, 7.0),))
    t = brute_force_valuation(ToyOperator(frozenset({0, 1}), frozenset({1})), g)
    assert t[0, 1] == 7.0
    assert np.isinf(t[1, 0]) and np.isinf(t[0, 0])


def test_brute_force_region_move():
    """Paths inside {0,1,2,3} ending in {3}, checked against a hand enumeration."""
    g = ToyGraph(5, ((0, 1, 1.0), (1, 3, 1.0), (0, 2, 0.5), (2, 3, 3.0), (0, 4, 0.1), (4, 3, 0.1), (3, 0, 2.0)))
    t = brute_force_valuation(ToyOperator(frozenset({0, 1, 2, 3}), frozenset({3})), g)
    assert t[0, 3] == 2.0  # 0-1-3; 0-4-3 leaves the region
    assert t[1, 3] == 1.0 and t[2, 3] == 3.0
    assert np.isinf(t[3, 3]) and np.isinf(t[4, 3])


def test_brute_force_cap():
    n = 9
    g = ToyGraph(n, tuple((a, b, 1.0) for a in range(n) for b in range(n) if a != b))
    with pytest.raises(ValueError):
        brute_force_valuation(ToyOperator(frozenset(range(n)), frozenset(range(n))), g, cap=1000)


def _check_admissible(V, table, vocab):
    for s, s2 in itertools.product(vocab, vocab):
        assert v_lower(V, s, s2) <= table_lower(table, s, s2) + 1e-9
        assert table_upper(table, s, s2) <= v_upper(V, s, s2) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_propagation_and_join_admissible(seed):
    r = np.random.default_rng(seed)
    g, vocab, (a, ta), (b, tb) = random_toy_domain(r)
    Va, Vb = sound_valuation(ta, vocab, r), sound_valuation(tb, vocab, r)
    _check_admissible(Va, ta, vocab)
    _check_admissible(propagate(Va, Vb), concat_table(ta, tb), vocab)
    _check_admissible(join(Va, Vb), union_table(ta, tb), vocab)


# -- plan nodes --------------------------------------------------------------------
def _op(name, prim=False):
    return Operator(name, prim)


def _step(l):
    return SymbolicValuation([(S([0]), S([0]), l, l)])


def test_root_and_extend():
    root = PlanNode.root(S([0]))
    assert root.valuation.as_dict() == {(S([0]), S([0])): (0.0, 0.0)}
    assert root.is_root and is_acyclic(root) and root.ops() == []
    with pytest.raises(ValueError):
        decompose(root)
    p = extend(root, _op("a"), SymbolicValuation([(S([0]), S([1]), 2, 3)]))
    assert p.base is root and decompose(p) == (root, p.op, ())
    assert is_acyclic(p)


def test_decompose_primitive_prefix_then_head():
    root = PlanNode.root(S([0]))
    n = root
    for k in range(2):
        n = extend(n, _op(f"m{k}", True), _step(1))
    prefix = n
    for name in ("Go[S1]", "T1", "b", "Act"):
        n = extend(n, _op(name), _step(1))
    base, head, ext = decompose(n)
    assert base is prefix and head.id == "Go[S1]" and len(ext) == 3
    assert recompose(base, head, ext) == n.ops()
    full = extend(extend(root, _op("x", True), _step(1)), _op("y", True), _step(1))
    assert decompose(full)[1] is None


@settings(max_examples=50)
@given(st.lists(st.booleans(), min_size=1, max_size=10))
def test_decompose_recompose_identity(prims):
    n = PlanNode.root(S([0]))
    for i, p in enumerate(prims):
        n = extend(n, _op(f"o{i}", p), _step(1))
    assert recompose(*decompose(n)) == n.ops()
    lowers = []
    m = n
    while m is not None:
        lowers.append(m.lower)
        m = m.pred
    assert lowers == sorted(lowers, reverse=True)


def test_cycle_detection():
    root = PlanNode.root(S([0]))
    out = extend(root, _op("go"), SymbolicValuation([(S([0]), S([1]), 1, 2)]))
    on = extend(out, _op("on"), SymbolicValuation([(S([1]), S([2]), 1, 2)]))
    back = extend(out, _op("back"), SymbolicValuation([(S([1]), S([0]), 0, 2)]))
    loop = extend(out, _op("stay"), SymbolicValuation([(S([1]), S([1]), 0, 0)]))
    assert is_acyclic(out) and is_acyclic(on)
    # the root already reaches {0} at cost 0, so any return there is a cycle
    assert not is_acyclic(extend(root, _op("noop"), _step(0)))
    assert not is_acyclic(extend(root, _op("step"), _step(1)))
    assert not is_acyclic(back)
    assert not is_acyclic(loop)
    # widening the reachable set is progress even at no extra cost
    wide = extend(root, _op("spread"), SymbolicValuation([(S([0]), S([0, 1]), 0, 0)]))
    assert is_acyclic(wide)

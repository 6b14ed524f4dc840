from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_max_matching
from tt3tiling.matching import (
    HallViolation,
    SizeMismatch,
    bipartite_density,
    bipartite_matching,
    hall_perfect_matching,
    is_matching,
    max_matching,
    random_equitable_split,
    violates_hall,
)


def _random_graph(n, p, seed):
    rng = random.Random(seed)
    return [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]


def test_small_examples():
    assert len(max_matching(3, [(0, 1), (1, 2)])) == 1
    k4 = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    assert len(max_matching(4, k4)) == 2
    # odd cycle plus pendant needs a blossom
    five = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5)]
    assert len(max_matching(6, five)) == 3


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10), st.floats(0.0, 1.0), st.integers(0, 10**6))
def test_max_matching_is_maximum(n, p, seed):
    edges = _random_graph(n, p, seed)
    m = max_matching(n, edges)
    assert is_matching(n, edges, m)
    assert len(m) == brute_max_matching(n, edges)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.floats(0.2, 1.0), st.integers(0, 10**6))
def test_degree_bound(n, p, seed):
    edges = _random_graph(n, p, seed)
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    assert len(max_matching(n, edges)) >= min(n // 2, min(deg))


def test_hall_examples():
    X, Y = ["a", "b", "c"], [1, 2, 3]
    full = {x: list(Y) for x in X}
    m = hall_perfect_matching(X, Y, full)
    assert sorted(m) == X and sorted(m.values()) == Y
    with pytest.raises(HallViolation) as info:
        hall_perfect_matching(X, Y, {"a": [], "b": [1], "c": [2]})
    assert info.value.subset == frozenset({"a"}) and info.value.neighborhood == frozenset()
    with pytest.raises(SizeMismatch):
        hall_perfect_matching(X, [1], full)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 9), st.floats(0.0, 1.0), st.integers(0, 10**6))
def test_hall_returns_matching_or_violator(k, p, seed):
    rng = random.Random(seed)
    X, Y = list(range(k)), list(range(100, 100 + k))
    adj = {x: [y for y in Y if rng.random() < p] for x in X}
    try:
        m = hall_perfect_matching(X, Y, adj)
    except HallViolation as exc:
        assert violates_hall(exc.subset, adj)
        assert len(exc.neighborhood) < len(exc.subset)
    else:
        assert len(set(m.values())) == k and all(m[x] in adj[x] for x in X)


def test_bipartite_respects_order():
    adj = {0: ["b", "a"], 1: ["a", "b"]}
    m = bipartite_matching([0, 1], adj)
    assert m == {0: "b", 1: "a"}


@pytest.mark.parametrize("size, shapes", [(4, {(2, 2)}), (5, {(2, 3), (3, 2)}), (0, {(0, 0)})])
def test_equitable_split(size, shapes):
    seen = set()
    for seed in range(40):
        a, b = random_equitable_split(range(size), seed)
        assert sorted(a + b) == list(range(size))
        seen.add((len(a), len(b)))
    assert seen == shapes


def test_split_keeps_density():
    rng = random.Random(1)
    A, B = list(range(60)), list(range(100, 160))
    adj = {a: [b for b in B if rng.random() < 0.7] for a in A}
    whole = bipartite_density(adj, A, B)
    for seed in range(5):
        A1, A2 = random_equitable_split(A, seed)
        B1, B2 = random_equitable_split(B, seed + 100)
        for Ai in (A1, A2):
            for Bj in (B1, B2):
                assert abs(bipartite_density(adj, Ai, Bj) - whole) < 0.1

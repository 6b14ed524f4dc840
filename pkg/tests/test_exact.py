from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import arc_set, naive_has_perfect_tiling, naive_max_tiling
from tt3tiling.exact import (
    InfeasibleBound,
    SolveBudget,
    Status,
    decide_small_exhaustive,
    find_perfect_tiling,
    greedy_tiling,
    max_tiling,
)
from tt3tiling.generators import (
    c_family_graph,
    cyclic_blowup,
    extremal_graph,
    random_oriented_graph,
    random_with_min_semidegree,
    semidegree_threshold,
    transitive_tournament,
)
from tt3tiling.graph import OrientedGraph, TransitiveTriangle, validate_tiling


def test_transitive_tournament_tiles_consecutively():
    out = find_perfect_tiling(transitive_tournament(21))
    assert out.status is Status.TILING
    assert sorted(out.tiling) == [TransitiveTriangle(3 * k, 3 * k + 1, 3 * k + 2) for k in range(7)]


@pytest.mark.parametrize("use_lp", [True, False])
def test_extremal_18_has_no_tiling(use_lp):
    out = find_perfect_tiling(extremal_graph(18)[0], use_lp=use_lp)
    assert out.status is Status.NO_TILING
    assert out.certificate in ("lp_bound", "exhausted")


def test_n_not_divisible():
    out = find_perfect_tiling(transitive_tournament(7))
    assert out.status is Status.NO_TILING and out.certificate == "n_not_divisible_by_3"


def test_c_family_one_tiles():
    g, _ = c_family_graph(1, 0)
    out = find_perfect_tiling(g)
    assert out.status is Status.TILING and validate_tiling(g, out.tiling).perfect


def test_budget_is_an_outcome():
    g, _ = extremal_graph(27)
    out = find_perfect_tiling(g, SolveBudget(node_limit=10), use_lp=False)
    assert out.status is Status.BUDGET_EXCEEDED and out.tiling is None


def test_budget_validation():
    with pytest.raises(ValueError):
        SolveBudget(node_limit=0)
    with pytest.raises(ValueError):
        SolveBudget(time_ms=-5)


def test_json_shape():
    out = find_perfect_tiling(transitive_tournament(6)).to_json()
    assert out["status"] == "tiling" and out["tiles"] == [[0, 1, 2], [3, 4, 5]]
    assert {"nodes", "wall_ms", "certificate"} <= set(out)


@settings(max_examples=120, deadline=None)
@given(st.sampled_from([3, 6, 9, 12]), st.floats(0.3, 1.0), st.integers(0, 10**6))
def test_agrees_with_naive_enumerator(n, p, seed):
    g = random_oriented_graph(n, p, seed)
    out = find_perfect_tiling(g)
    assert out.status is not Status.BUDGET_EXCEEDED
    assert (out.status is Status.TILING) == naive_has_perfect_tiling(n, arc_set(g))
    if out.found:
        chk = validate_tiling(g, out.tiling)
        assert chk.valid and chk.perfect


def test_max_tiling_examples():
    res = max_tiling(cyclic_blowup(12))
    assert len(res.tiling) == 0 and res.optimal
    res = max_tiling(extremal_graph(18)[0])
    assert len(res.tiling) == 5 and res.optimal and res.upper_bound == 5
    tiling, optimal = max_tiling(transitive_tournament(10))
    assert len(tiling) == 3 and optimal


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 11), st.floats(0.3, 1.0), st.integers(0, 10**6))
def test_max_tiling_matches_oracle(n, p, seed):
    g = random_oriented_graph(n, p, seed)
    res = max_tiling(g)
    assert res.optimal
    assert len(res.tiling) == naive_max_tiling(n, arc_set(g))
    assert len(greedy_tiling(g)) <= len(res.tiling) <= n // 3
    assert validate_tiling(g, res.tiling).valid


@settings(max_examples=15, deadline=None)
@given(st.integers(18, 36), st.integers(0, 10**6))
def test_near_tiling_leftover_small(n, seed):
    g = random_with_min_semidegree(n, semidegree_threshold(n), seed, drop=0.3)
    res = max_tiling(g, SolveBudget(node_limit=100_000))
    if res.optimal:
        assert n - 3 * len(res.tiling) <= 11


def test_exhaustive_small_cases():
    rep = decide_small_exhaustive(3, 0)
    assert rep.labeled_instances == 27 and rep.tileable == 6
    tourn = [c for c in rep.classes if c["tournament"]]
    assert sorted(c["tileable"] for c in tourn) == [False, True]
    rep = decide_small_exhaustive(3, 1)
    assert rep.labeled_instances == 2 and rep.tileable == 0
    with pytest.raises(InfeasibleBound):
        decide_small_exhaustive(6, 3)


def test_exhaustive_counts_regular_tournaments_on_seven():
    # labeled regular tournaments on 7 vertices: 2640 (OEIS A007079)
    rep = decide_small_exhaustive(7, 3)
    assert rep.labeled_instances == 2640


@pytest.mark.slow
def test_exhaustive_nine_regular():
    rep = decide_small_exhaustive(9, 4)
    # labeled regular tournaments on 9 vertices: 3230080 (OEIS A007079)
    assert rep.labeled_instances == 3230080
    assert rep.non_tileable == []


def test_empty_graph():
    out = find_perfect_tiling(OrientedGraph(0))
    assert out.status is Status.TILING and len(out.tiling) == 0

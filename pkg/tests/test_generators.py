from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import arc_set, semidegree
from tt3tiling.exact import Status, find_perfect_tiling
from tt3tiling.generators import (
    BadN,
    Exhausted,
    ExtremalSpec,
    c_family_graph,
    cyclic_blowup,
    cyclic_blowup_parts,
    extremal_graph,
    max_deleted_degree,
    perturb,
    random_oriented_graph,
    random_with_min_semidegree,
    semidegree_threshold,
    transitive_tournament,
)
from tt3tiling.graph import count_transitive_triangles, enumerate_transitive_triangles, mask_of


def test_extremal_sizes():
    assert ExtremalSpec.for_n(18).sizes == (4, 4, 5, 2, 3)
    assert ExtremalSpec.for_n(9).sizes == (2, 2, 3, 1, 1)
    for n in range(9, 300, 3):
        assert sum(ExtremalSpec.for_n(n).sizes) == n


@pytest.mark.parametrize("n", [8, 10, 6, 0])
def test_extremal_bad_n(n):
    with pytest.raises(BadN):
        extremal_graph(n)


def test_extremal_arc_families():
    g, p = extremal_graph(18)
    W1, W2, W3, U1, U2 = (set(p[k]) for k in ("W1", "W2", "W3", "U1", "U2"))
    expected = set()
    for src, dst in [(W1, W2), (W2, W3), (W3, W1), (U1, U2), (W1 | W2, U1), (U1, W3), (U2, W1 | W2), (W3, U2)]:
        expected |= {(u, v) for u in src for v in dst}
    assert set(g.arcs()) == expected


@pytest.mark.parametrize("n", [9, 18, 27, 36])
def test_every_tt_meets_u(n):
    g, p = extremal_graph(n)
    U = mask_of(p["U1"] + p["U2"])
    assert all(t.mask & U for t in enumerate_transitive_triangles(g))


def test_extremal_semidegree_closed_forms():
    spec = ExtremalSpec.for_n(18)
    g, _ = extremal_graph(18)
    assert g.min_semidegree() == 6 == spec.abstract_bound() == spec.w3_semidegree()
    assert spec.stated_formula() == 7


def test_extremal_semidegree_is_ceiling_form():
    # the computed value follows ceil(7n/18) - 1 on every multiple of 3 in range;
    # the floor form only agrees when 18 divides n
    for n in range(9, 91, 3):
        d = extremal_graph(n)[0].min_semidegree()
        assert d == semidegree_threshold(n) - 1
        assert (d == 7 * n // 18 - 1) == (n % 18 == 0)


def test_cyclic_blowup():
    g = cyclic_blowup(3)
    assert sorted(g.arcs()) == [(0, 1), (1, 2), (2, 0)]
    g, p = cyclic_blowup_parts(12)
    assert [len(p[k]) for k in ("W1", "W2", "W3")] == [4, 4, 4]
    assert count_transitive_triangles(g) == 0 and g.min_semidegree() == 4
    assert [len(b) for b in cyclic_blowup_parts(10)[1].blocks.values()] == [3, 3, 4]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_c_family_invariants(m):
    g, spec = c_family_graph(m, seed=m)
    U = mask_of(spec.U)
    assert spec.n == g.n == 18 * m
    assert all(not (g.nbr_mask(u) & U) for u in spec.U)
    for w in spec.W:
        assert (g.out_mask(w) & U).bit_count() == 3 * m == (g.in_mask(w) & U).bit_count()
    within = sum(1 for u, v in g.arcs() if u in spec.W and v in spec.W)
    assert within == 3 * (4 * m) ** 2
    assert count_transitive_triangles(g.induced(spec.W)[0]) == 0


def test_c_family_seeded():
    assert c_family_graph(2, 5)[0] == c_family_graph(2, 5)[0]
    assert c_family_graph(2, 5)[0] != c_family_graph(2, 6)[0]
    assert c_family_graph(2, 0)[0].num_arcs() == 480


def test_random_oriented_graph():
    assert random_oriented_graph(10, 1.0, 1).is_tournament()
    assert random_oriented_graph(10, 0.0, 1).num_arcs() == 0
    assert random_oriented_graph(15, 0.4, 9) == random_oriented_graph(15, 0.4, 9)
    with pytest.raises(ValueError):
        random_oriented_graph(5, 1.5)


def test_random_with_min_semidegree():
    assert random_with_min_semidegree(7, 0, 1).n == 7
    g = random_with_min_semidegree(9, 4, 2)
    assert g.is_tournament() and all(g.out_degree(v) == 4 for v in range(9))
    with pytest.raises(Exhausted):
        random_with_min_semidegree(6, 3, 0, max_tries=3)


@settings(max_examples=25, deadline=None)
@given(st.integers(12, 40), st.integers(0, 1000), st.sampled_from([0.0, 0.3]))
def test_sampler_meets_threshold(n, seed, drop):
    d = semidegree_threshold(n)
    g = random_with_min_semidegree(n, d, seed, drop=drop)
    assert g.min_semidegree() >= d


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 1000))
def test_perturb_budget(m, budget, seed):
    g, _ = c_family_graph(m, seed)
    h = perturb(g, budget, seed)
    assert max_deleted_degree(g, h) <= budget
    assert set(h.arcs()) <= set(g.arcs())
    assert perturb(g, budget, seed) == h


def test_perturb_zero_is_identity():
    g = transitive_tournament(8)
    assert perturb(g, 0, 3) == g


def test_perturbed_c_family_three_still_tiles():
    g, _ = c_family_graph(3, 1)
    h = perturb(g, 1, 1)
    assert find_perfect_tiling(h).status is Status.TILING


def test_extremal_semidegree_against_oracle():
    for n in range(9, 91, 3):
        g = extremal_graph(n)[0]
        assert semidegree(n, arc_set(g)) == g.min_semidegree() == semidegree_threshold(n) - 1

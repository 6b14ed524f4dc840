from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tt3tiling.exact import StageFailed
from tt3tiling.generators import (
    c_family_graph,
    cyclic_blowup_parts,
    extremal_graph,
    perturb,
    random_oriented_graph,
    transitive_tournament,
)
from tt3tiling.graph import OrientedGraph, count_transitive_triangles, validate_tiling
from tt3tiling.extremal import (
    BalanceFailed,
    CyclicTriple,
    ExtremalConfig,
    FinishFailed,
    NoCyclicTriangle,
    NotExtremal,
    adjacency_matrix,
    classify_vertices,
    cyclic_label,
    cyclic_partition,
    cyclicity,
    extremal_tile,
    find_tt3_free_witness,
    finish_tiling,
    is_tt3_free,
    tt_counts,
)


def planted_bad_vertex(m: int, seed: int, per_part: int):
    """C-family graph where one U vertex loses ``per_part`` arcs into each W part."""
    g, spec = c_family_graph(m, seed)
    u = spec.U[0]
    rng = random.Random(seed)
    drop = set()
    for part in spec.parts:
        nb = [w for w in part if g.adjacent(u, w)]
        for w in rng.sample(nb, per_part):
            drop.add((u, w) if g.has_arc(u, w) else (w, u))
    return OrientedGraph(g.n, [a for a in g.arcs() if a not in drop]), spec


def stage_sizes(out):
    return {s["stage"]: s for s in out.stats["trace"]}


def test_tt_counts_matches_enumeration():
    g = random_oriented_graph(15, 0.7, 3)
    counts = tt_counts(adjacency_matrix(g))
    assert counts.sum() == 3 * count_transitive_triangles(g)
    assert tt_counts(np.zeros((0, 0), dtype=np.int64)).shape == (0,)


def test_witness_on_blowup():
    g, p = cyclic_blowup_parts(12)
    W = find_tt3_free_witness(g)
    assert W == frozenset(range(12)) and is_tt3_free(g, W)


def test_witness_none_without_cycles():
    g = transitive_tournament(9)
    assert find_tt3_free_witness(g) == frozenset()
    assert find_tt3_free_witness(g, min_size=3) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 14), st.floats(0.3, 1.0), st.integers(0, 10**6))
def test_witness_is_tt3_free_and_maximal(n, p, seed):
    g = random_oriented_graph(n, p, seed)
    W = find_tt3_free_witness(g, seed=seed)
    assert is_tt3_free(g, W)
    if W:
        # nothing outside can be added
        assert all(not is_tt3_free(g, W | {v}) for v in range(n) if v not in W)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_c_family_partition_recovers_parts(m):
    g, spec = c_family_graph(m, m)
    W = find_tt3_free_witness(g, 12 * m)
    assert W == frozenset(spec.W)
    triple = cyclic_partition(g, W)
    assert {triple.W1, triple.W2, triple.W3} == {frozenset(p) for p in spec.parts}
    assert triple.is_gamma_cyclic(g, 0) and triple.is_lambda_equitable(g.n, 0)


def test_cyclic_partition_needs_a_cycle():
    with pytest.raises(NoCyclicTriangle):
        cyclic_partition(transitive_tournament(6), range(6))


def test_cyclicity_and_labels():
    g, p = cyclic_blowup_parts(9)
    triple = CyclicTriple(*(frozenset(p[k]) for k in ("W1", "W2", "W3")))
    masks = triple.masks()
    v = p["W2"][0]
    assert [cyclicity(g, masks, v, i) for i in range(3)] == [6, 0, 6]
    assert cyclic_label(g, masks, v, 0) == 1
    assert cyclic_label(g, masks, v, -1) is None


def test_classify_c_family():
    g, spec = c_family_graph(2, 0)
    dec = classify_vertices(g, cyclic_partition(g, spec.W), 0.05)
    assert dec.U == frozenset(spec.U) and dec.Z == frozenset()
    assert dec.U_prime == dec.U and dec.bad == sorted(spec.U)
    assert [len(p) for p in dec.W_prime] == [8, 8, 8]


def test_classify_planted_bad_vertex():
    g, spec = planted_bad_vertex(6, 1, 7)
    dec = classify_vertices(g, cyclic_partition(g, spec.W), 0.05, 0.17)
    assert dec.Z == dec.Z_prime == frozenset({spec.U[0]})


def test_config_presets():
    desk = ExtremalConfig.preset("desk")
    paper = ExtremalConfig.preset("paper")
    assert desk.tau == 0.05
    assert paper.tau == pytest.approx(1 / 24 / 288)
    assert paper.alpha == pytest.approx(paper.tau**3)
    assert paper.beta_finish == pytest.approx(16 * 18 * paper.tau)
    # 16*18*tau with tau = beta/288 lands back on beta
    assert paper.beta_finish == pytest.approx(paper.beta)
    with pytest.raises(ValueError):
        ExtremalConfig.preset("fast")


@pytest.mark.parametrize("m", range(1, 6))
def test_pipeline_c_family(m):
    g, _ = c_family_graph(m, m)
    out = extremal_tile(g, seed=m)
    chk = validate_tiling(g, out.tiling)
    assert chk.valid and chk.perfect
    assert stage_sizes(out)["equalize"]["checks"]["P5"]


@pytest.mark.parametrize("m", [4, 6])
def test_pipeline_perturbed(m):
    g, _ = c_family_graph(m, 0)
    h = perturb(g, max(1, m // 4), seed=m)
    out = extremal_tile(h, seed=0)
    assert validate_tiling(h, out.tiling).perfect


def test_pipeline_stage_one_positive_c():
    # the damaged U vertex stays cyclic for one part and joins W'
    g, _ = planted_bad_vertex(4, 1, 8)
    out = extremal_tile(g, config=ExtremalConfig("t", 0.01, 0.25, 0.05, 0.05))
    s = stage_sizes(out)
    assert s["balance"]["T1"] == 1 and s["equalize"]["T3"] == 5
    assert validate_tiling(g, out.tiling).perfect


def test_pipeline_stage_one_negative_c():
    # an arc inside W1 pushes one endpoint out of the witness
    g, spec = c_family_graph(4, 2)
    h = OrientedGraph(g.n, g.arcs() + [(spec.W1[0], spec.W1[1])])
    out = extremal_tile(h, config=ExtremalConfig("t", 0.03, 0.25, 0.05, 0.05))
    s = stage_sizes(out)
    assert s["witness"]["size"] == 47 and s["balance"]["T1"] == 1
    assert validate_tiling(h, out.tiling).perfect


def test_pipeline_absorbs_bad_vertex():
    g, _ = planted_bad_vertex(8, 1, 8)
    out = extremal_tile(g, config=ExtremalConfig("t", 0.01, 0.13, 0.05, 0.05))
    s = stage_sizes(out)
    assert s["classify"]["Z_prime"] == 1 and s["absorb_bad"]["T2"] == 1
    assert all(s["equalize"]["checks"].values())
    assert validate_tiling(g, out.tiling).perfect


def test_pipeline_equalize_needs_room():
    # the same graph under the desk tau: stage 3 uses more than tau*n vertices
    g, _ = planted_bad_vertex(6, 1, 7)
    with pytest.raises(StageFailed) as info:
        extremal_tile(g)
    assert info.value.stage in ("equalize", "balance")


@pytest.mark.parametrize("n", [9, 18, 27, 36])
def test_pipeline_extremal_graph_fails(n):
    with pytest.raises(StageFailed) as info:
        extremal_tile(extremal_graph(n)[0])
    assert isinstance(info.value, BalanceFailed)
    assert info.value.trace[-1]["stage"] == "classify"


def test_pipeline_not_extremal():
    with pytest.raises(NotExtremal):
        extremal_tile(transitive_tournament(18))


def test_pipeline_bad_n():
    with pytest.raises(StageFailed) as info:
        extremal_tile(transitive_tournament(10))
    assert info.value.stage == "input"


def test_failure_serialises():
    with pytest.raises(StageFailed) as info:
        extremal_tile(extremal_graph(18)[0])
    js = info.value.to_json()
    assert js["stage"] == "balance" and js["trace"]


def test_finish_shape_and_isolation():
    g, spec = c_family_graph(1, 0)
    tiling, info = finish_tiling(g, spec.parts, spec.U)
    assert validate_tiling(g, tiling).perfect and info["attempts"] >= 1
    with pytest.raises(FinishFailed):
        finish_tiling(g, spec.parts, spec.U[:-1])
    u = spec.U[0]
    h = OrientedGraph(g.n, [a for a in g.arcs() if u not in a])
    with pytest.raises(FinishFailed) as info:
        finish_tiling(h, spec.parts, spec.U)
    assert info.value.vertex == u


def test_finish_empty():
    tiling, info = finish_tiling(OrientedGraph(0), ((), (), ()), ())
    assert len(tiling) == 0

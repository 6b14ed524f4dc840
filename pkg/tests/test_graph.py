from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import arc_set, cyclic_triples, triangle_triples
from tt3tiling.generators import cyclic_blowup, extremal_graph, random_oriented_graph, transitive_tournament
from tt3tiling.graph import (
    BadVertex,
    DuplicateArc,
    GraphFormatError,
    LoopRejected,
    OrientationConflict,
    OrientedGraph,
    Tiling,
    TransitiveTriangle,
    VertexSetPartition,
    add_arc,
    count_cyclic_triangles,
    count_transitive_triangles,
    enumerate_cyclic_triangles,
    enumerate_transitive_triangles,
    induced,
    min_semidegree,
    transitive_completions,
    validate_tiling,
)


@st.composite
def oriented_graphs(draw, max_n: int = 9):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 10**6))
    p = draw(st.sampled_from([0.0, 0.3, 0.7, 1.0]))
    return random_oriented_graph(n, p, seed)


def test_add_arc_updates_degrees():
    g = add_arc(OrientedGraph(2), 0, 1)
    assert g.out_degree(0) == 1 and g.in_degree(1) == 1
    assert g.has_arc(0, 1) and not g.has_arc(1, 0)


def test_add_arc_rejects_bad_input():
    g = OrientedGraph(3, [(0, 1)])
    with pytest.raises(OrientationConflict):
        g.add_arc(1, 0)
    with pytest.raises(LoopRejected):
        g.add_arc(0, 0)
    with pytest.raises(BadVertex):
        g.add_arc(0, 7)


def test_min_semidegree_examples():
    assert min_semidegree(OrientedGraph(3, [(0, 1), (1, 2), (2, 0)])) == 1
    assert min_semidegree(OrientedGraph(5)) == 0
    assert min_semidegree(extremal_graph(18)[0]) == 6


def test_triangle_enumeration_examples():
    cyc = OrientedGraph(3, [(0, 1), (1, 2), (2, 0)])
    assert enumerate_transitive_triangles(cyc) == []
    assert enumerate_cyclic_triangles(cyc) == [(0, 1, 2)]
    assert enumerate_transitive_triangles(transitive_tournament(3)) == [TransitiveTriangle(0, 1, 2)]
    assert len(enumerate_transitive_triangles(transitive_tournament(4))) == 4
    assert enumerate_cyclic_triangles(transitive_tournament(4)) == []


def test_extremal_w_part_cyclic_count():
    g, part = extremal_graph(18)
    sub, _ = induced(g, part["W1"] + part["W2"] + part["W3"])
    assert count_cyclic_triangles(sub) == 4 * 4 * 5 == 80
    # whole graph: frozen from the brute-force oracle
    assert count_transitive_triangles(g) == 210
    assert count_cyclic_triangles(g) == 228


@settings(max_examples=60, deadline=None)
@given(oriented_graphs())
def test_triangles_match_oracle(g):
    arcs = arc_set(g)
    assert [tuple(t) for t in enumerate_transitive_triangles(g)] == triangle_triples(g.n, arcs)
    cyc = enumerate_cyclic_triangles(g)
    assert sorted(tuple(sorted(t)) for t in cyc) == cyclic_triples(g.n, arcs)
    # each cycle is listed in arc order starting from its smallest vertex
    for a, b, c in cyc:
        assert a == min(a, b, c) and g.has_arc(a, b) and g.has_arc(b, c) and g.has_arc(c, a)


@settings(max_examples=60, deadline=None)
@given(oriented_graphs())
def test_every_triangle_cyclic_xor_transitive(g):
    undirected = 0
    for a in range(g.n):
        for b in range(a + 1, g.n):
            for c in range(b + 1, g.n):
                undirected += g.adjacent(a, b) and g.adjacent(b, c) and g.adjacent(a, c)
    assert count_transitive_triangles(g) + count_cyclic_triangles(g) == undirected


@settings(max_examples=60, deadline=None)
@given(oriented_graphs())
def test_degree_sums(g):
    m = g.num_arcs()
    assert sum(g.out_degree(v) for v in range(g.n)) == m
    assert sum(g.in_degree(v) for v in range(g.n)) == m
    for v in range(g.n):
        assert g.out_degree(v) + g.in_degree(v) == g.degree(v) <= g.n - 1


@settings(max_examples=40, deadline=None)
@given(oriented_graphs(), st.data())
def test_transitive_completions_agree_with_roles(g, data):
    arcs = g.arcs()
    if not arcs:
        return
    u, v = data.draw(st.sampled_from(arcs))
    mask = transitive_completions(g, u, v)
    expect = {w for w in range(g.n) if w not in (u, v) and (len({u, v, w}) == 3) and
              any(set(t) == {u, v, w} for t in enumerate_transitive_triangles(g))}
    assert {w for w in range(g.n) if mask >> w & 1} == expect


def test_validate_tiling():
    g = transitive_tournament(9)
    t = Tiling([TransitiveTriangle(0, 1, 2), TransitiveTriangle(3, 4, 5), TransitiveTriangle(6, 7, 8)])
    chk = validate_tiling(g, t)
    assert chk.valid and chk.perfect
    bad = Tiling([TransitiveTriangle(0, 1, 2), TransitiveTriangle(2, 3, 4)])
    chk = validate_tiling(g, bad)
    assert not chk.valid and "2" in chk.error
    wrong_roles = Tiling([TransitiveTriangle(2, 1, 0)])
    assert not validate_tiling(g, wrong_roles).valid
    partial = Tiling([TransitiveTriangle(0, 1, 2)])
    chk = validate_tiling(g, partial)
    assert chk.valid and not chk.perfect


def test_induced_cases():
    g = OrientedGraph(4, [(0, 1), (1, 2), (2, 3)])
    same, old = induced(g, range(4))
    assert same == g and old == [0, 1, 2, 3]
    empty, old = induced(g, [])
    assert empty.n == 0 and old == []
    one, old = induced(g, [2, 1])
    assert one.arcs() == [(0, 1)] and old == [1, 2]
    with pytest.raises(BadVertex):
        induced(g, [9])


def test_text_round_trip(tmp_path):
    g = random_oriented_graph(12, 0.6, 3)
    path = tmp_path / "g.txt"
    g.write(path, comment="sample")
    assert OrientedGraph.read(path) == g


@pytest.mark.parametrize(
    "text, exc",
    [
        ("n 3\n0 1\n0 1\n", DuplicateArc),
        ("n 3\n0 1\n1 0\n", OrientationConflict),
        ("n 3\n1 1\n", LoopRejected),
        ("n 3\n0 5\n", BadVertex),
        ("0 1\n", GraphFormatError),
        ("n 3\n0\n", GraphFormatError),
    ],
)
def test_reader_rejects(text, exc):
    with pytest.raises(exc):
        OrientedGraph.from_text(text)


def test_reader_accepts_comments():
    g = OrientedGraph.from_text("# hello\n\nn 3\n# arc\n0 1\n1 2\n")
    assert g.arcs() == [(0, 1), (1, 2)]


def test_partition_disjointness():
    p = VertexSetPartition({"A": (0, 1), "B": (2,)})
    assert p.union == frozenset({0, 1, 2}) and p.block_of(2) == "B"
    with pytest.raises(ValueError):
        VertexSetPartition({"A": (0, 1), "B": (1,)})


def test_cyclic_blowup_has_no_transitive_triangles():
    assert count_transitive_triangles(cyclic_blowup(12)) == 0

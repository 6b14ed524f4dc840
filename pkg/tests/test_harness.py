from __future__ import annotations

import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tt3tiling.generators import cyclic_blowup, extremal_graph, transitive_tournament
from tt3tiling.harness import (
    Report,
    default_threads,
    derive_seed,
    prop_deg_counts,
    small_exhaustive_probe,
    sweep_extremal_bound,
    sweep_extremal_pipeline,
    sweep_near_tiling,
    tt_count_bound,
    tt_invariant_record,
    verify_prop_cyctri,
    verify_prop_deg,
    verify_prop_tt4,
)


def test_prop_tt4():
    rep = verify_prop_tt4()
    assert rep.passed and rep.aggregate["instances"] == 64


def test_prop_cyctri():
    rep = verify_prop_cyctri()
    assert rep.passed and len(rep.records) == 8
    # x dominating or dominated by the whole cycle uses all three arcs
    assert [r["transitive_edges"] for r in rep.records if r["out_degree_x"] in (0, 3)] == [3, 3]


@pytest.mark.parametrize("n, vacuous", [(18, True), (27, False), (36, False)])
def test_prop_deg_on_extremal(n, vacuous):
    rep = verify_prop_deg(extremal_graph(n)[0], f"extremal{n}")
    assert rep.passed and rep.aggregate["vacuous"] is vacuous


def test_prop_deg_vacuous_on_sparse():
    rep = verify_prop_deg(transitive_tournament(9))
    assert rep.passed and rep.aggregate["vacuous"]


def test_prop_deg_counts_cyclic_blowup():
    r = prop_deg_counts(cyclic_blowup(9))
    # for u -> v the in-neighbours of v share u's part, so none is adjacent to u
    assert r["bound"] == 0 and r["min_a"] == r["min_b"] == r["min_c"] == 0


def test_derive_seed_stable():
    assert derive_seed(7, 3) == derive_seed(7, 3)
    assert derive_seed(7, 3) != derive_seed(7, 4) != derive_seed(8, 3)
    assert 0 <= derive_seed(2**64 - 1, 10**9) < 2**63


def test_default_threads(monkeypatch):
    monkeypatch.delenv("TT3_THREADS", raising=False)
    assert default_threads() == 1
    monkeypatch.setenv("TT3_THREADS", "4")
    assert default_threads() == 4


def test_tt_invariant_record():
    rec = tt_invariant_record(extremal_graph(18)[0])
    assert rec["tt_count"] == 210 and not rec["tt_bound_applies"]
    assert tt_count_bound(18) == 108


def test_report_round_trip():
    rep = Report("x", {"a": [1, 2]}, 3, [{"k": 1, "v": "p"}], {"m": 1}, {"ok": True}, ("k",))
    back = Report.from_json(rep.to_json())
    assert back == rep and back.to_json() == rep.to_json()
    assert rep.to_csv() == "k\n1\n"


def test_report_passed_requires_all_verdicts():
    assert Report("x", verdicts={"a": True, "b": False}).passed is False
    assert Report("x").passed is True


def test_extremal_bound_sweep_small():
    rep = sweep_extremal_bound([9, 18], exact_up_to=18)
    by = {r["n"]: r for r in rep.records}
    assert by[18]["matches_abstract"] and not by[9]["matches_abstract"]
    assert by[9]["semidegree"] == by[9]["ceil_formula"] == 3
    assert rep.verdicts["no_tiling_definitive"] and rep.verdicts["solved_no_tiling"]
    assert not rep.verdicts["semidegree_equals_abstract"]
    assert rep.aggregate["abstract_mismatches"] == [9]
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert [r["n"] for r in rows] == ["9", "18"]


def test_near_tiling_sweep_deterministic():
    a = sweep_near_tiling([18, 21], 4, seed=5)
    b = sweep_near_tiling([18, 21], 4, seed=5)
    assert a.to_json() == b.to_json() and a.passed
    assert [r["index"] for r in a.records] == [0, 1, 2, 3]


def test_near_tiling_sweep_parallel_matches_serial():
    a = sweep_near_tiling([18, 24], 4, seed=1, threads=1)
    b = sweep_near_tiling([18, 24], 4, seed=1, threads=2)
    assert a.to_json() == b.to_json()


def test_extremal_pipeline_sweep_small():
    rep = sweep_extremal_pipeline([1, 2], [2], [18], seed=0)
    assert rep.passed
    assert [r["tiled"] for r in rep.records] == [True, True, True, False]


def test_probe_without_nine():
    rep = small_exhaustive_probe(include_nine=False)
    assert rep.passed and "n9_d4_all_tile" not in rep.verdicts
    assert rep.records[0]["labeled_instances"] == 27


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_near_tiling_reports_seed_function(seed):
    rep = sweep_near_tiling([18], 1, seed=seed)
    assert rep.records[0]["seed"] == derive_seed(seed, 0)

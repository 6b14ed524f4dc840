"""Proposition verifiers, sweeps and reproducible reports."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .exact import SolveBudget, StageFailed, Status, decide_small_exhaustive, find_perfect_tiling, max_tiling
from .extremal import extremal_tile
from .generators import (
    ExtremalSpec,
    c_family_graph,
    extremal_graph,
    perturb,
    random_with_min_semidegree,
    semidegree_threshold,
)
from .graph import OrientedGraph, bits, count_transitive_triangles, mask_of, transitive_triangle_on, validate_tiling
from .nonextremal import find_absorbing_set, lex_max_tiling, nonextremal_tile, tt_partners


@dataclass
class Report:
    """Outcome of one experiment.

    ``records`` holds one dict per instance in index order; ``verdicts``
    maps a check name to pass/fail.  Wall-clock times are kept out of the
    JSON so that a report is a pure function of its parameters and seed.
    """

    experiment: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    records: list[dict] = field(default_factory=list)
    aggregate: dict[str, Any] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)
    csv_fields: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["csv_fields"] = list(self.csv_fields)
        d["passed"] = self.passed
        return d

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Report:
        d = json.loads(text)
        d.pop("passed", None)
        d["csv_fields"] = tuple(d.get("csv_fields", ()))
        return cls(**d)

    def to_csv(self) -> str:
        fields = list(self.csv_fields) or sorted({k for r in self.records for k in r})
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for r in self.records:
            writer.writerow({k: r.get(k) for k in fields})
        return buf.getvalue()


def derive_seed(master: int, index: int) -> int:
    """Stable per-instance seed from a master seed and an instance index."""
    digest = hashlib.sha256(f"{master}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def default_threads() -> int:
    return max(1, int(os.environ.get("TT3_THREADS", "1")))


def _run_ordered(fn: Callable, jobs: Sequence, threads: int) -> list:
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def tt_count_bound(n: int) -> float:
    return n**3 / 54


def tt_invariant_record(g: OrientedGraph) -> dict:
    """TT count and whether the n^3/54 bound applies and holds."""
    count = count_transitive_triangles(g)
    applies = 18 * g.min_semidegree() >= 7 * g.n
    return {"tt_count": count, "tt_bound_applies": applies, "tt_bound_ok": (not applies) or count >= tt_count_bound(g.n)}


# -- proposition verifiers ---------------------------------------------------------------


def verify_prop_tt4() -> Report:
    """Every vertex of every labeled 4-vertex tournament lies in a transitive triangle."""
    pairs = list(itertools.combinations(range(4), 2))
    records = []
    for code in range(1 << len(pairs)):
        g = OrientedGraph(4, ((u, v) if code >> k & 1 else (v, u) for k, (u, v) in enumerate(pairs)))
        uncovered = [v for v in range(4) if not any(tt_partners(g, v, w) for w in bits(g.nbr_mask(v)))]
        records.append({"code": code, "arcs": g.arcs(), "uncovered": uncovered, "ok": not uncovered})
    failures = sum(not r["ok"] for r in records)
    return Report(
        "verify_prop_tt4",
        records=records,
        aggregate={"instances": len(records), "failures": failures},
        verdicts={"every_vertex_in_tt": failures == 0 and len(records) == 64},
        csv_fields=("code", "ok"),
    )


def prop_deg_counts(g: OrientedGraph) -> dict:
    """Minimum counts for the three arc/path statements and the bound they are compared to."""
    bound = 3 * g.min_semidegree() - g.n
    min_a = min_b = min_c = None
    for u, v in g.arcs():
        a = (g.nbr_mask(u) & g.in_mask(v)).bit_count()
        b = (g.nbr_mask(v) & g.out_mask(u)).bit_count()
        min_a = a if min_a is None else min(min_a, a)
        min_b = b if min_b is None else min(min_b, b)
    paths = 0
    for v in range(g.n):
        for u in bits(g.in_mask(v)):
            left = tt_partners(g, v, u)
            for w in bits(g.out_mask(v)):
                paths += 1
                c = ((left | tt_partners(g, v, w)) & ~mask_of((u, w))).bit_count()
                min_c = c if min_c is None else min(min_c, c)
    return {"bound": bound, "min_a": min_a, "min_b": min_b, "min_c": min_c, "paths": paths}


def verify_prop_deg(g: OrientedGraph, name: str = "graph") -> Report:
    """Arc and path counts against 3*semidegree - n (vacuous when that is <= 0)."""
    r = prop_deg_counts(g)
    bound = r["bound"]
    ok_a = r["min_a"] is None or r["min_a"] >= bound
    ok_b = r["min_b"] is None or r["min_b"] >= bound
    ok_c = r["min_c"] is None or r["min_c"] >= 2 * bound
    return Report(
        "verify_prop_deg",
        params={"graph": name, "n": g.n},
        records=[{"graph": name, "n": g.n, **r}],
        aggregate={"vacuous": bound <= 0},
        verdicts={"a": ok_a, "b": ok_b, "c": ok_c},
        csv_fields=("graph", "n", "bound", "min_a", "min_b", "min_c"),
    )


def verify_prop_cyctri() -> Report:
    """A vertex joined to all of a cyclic triangle forms a TT with at least two of its arcs."""
    records = []
    for code in range(8):
        # vertices 0,1,2 form the cycle 0->1->2->0; vertex 3 is x
        g = OrientedGraph(4, [(0, 1), (1, 2), (2, 0)])
        for k in range(3):
            g.add_arc(3, k) if code >> k & 1 else g.add_arc(k, 3)
        good = sum(transitive_triangle_on(g, 3, a, b) is not None for a, b in ((0, 1), (1, 2), (2, 0)))
        records.append({"code": code, "out_degree_x": code.bit_count(), "transitive_edges": good, "ok": good >= 2})
    failures = sum(not r["ok"] for r in records)
    return Report(
        "verify_prop_cyctri",
        records=records,
        aggregate={"cases": 8, "failures": failures},
        verdicts={"at_least_two": failures == 0},
        csv_fields=("code", "out_degree_x", "transitive_edges", "ok"),
    )


# -- sweeps -------------------------------------------------------------------------------------


def _extremal_bound_instance(job: tuple[int, int | None, int]) -> dict:
    n, node_limit, exact_up_to = job
    spec = ExtremalSpec.for_n(n)
    g, _ = extremal_graph(n)
    rec = {
        "n": n,
        "sizes": list(spec.sizes),
        "semidegree": g.min_semidegree(),
        "abstract_formula": spec.abstract_bound(),
        "stated_formula": spec.stated_formula(),
        "ceil_formula": semidegree_threshold(n) - 1,
        "no_tiling": None,
        "definitive": False,
    }
    rec["matches_abstract"] = rec["semidegree"] == rec["abstract_formula"]
    rec["matches_stated"] = rec["semidegree"] == rec["stated_formula"]
    if n <= exact_up_to:
        out = find_perfect_tiling(g, SolveBudget(node_limit=node_limit))
        rec["no_tiling"] = out.status is Status.NO_TILING
        rec["definitive"] = out.status is not Status.BUDGET_EXCEEDED
        rec["certificate"] = out.certificate
        rec["nodes"] = out.nodes
    return rec


def sweep_extremal_bound(
    n_list: Iterable[int], node_limit: int | None = 2_000_000, exact_up_to: int = 36, threads: int = 1
) -> Report:
    """Semidegree of the extremal construction against both closed forms, plus non-tileability."""
    n_list = list(n_list)
    for n in n_list:
        ExtremalSpec.for_n(n)
    records = _run_ordered(_extremal_bound_instance, [(n, node_limit, exact_up_to) for n in n_list], threads)
    solved = [r for r in records if r["definitive"]]
    return Report(
        "sweep_extremal_bound",
        params={"n_list": n_list, "node_limit": node_limit, "exact_up_to": exact_up_to},
        records=records,
        aggregate={
            "abstract_mismatches": [r["n"] for r in records if not r["matches_abstract"]],
            "stated_mismatches": [r["n"] for r in records if not r["matches_stated"]],
            "ceil_formula_matches": all(r["semidegree"] == r["ceil_formula"] for r in records),
            "exact_checked": [r["n"] for r in records if r["n"] <= exact_up_to],
        },
        verdicts={
            "semidegree_equals_abstract": all(r["matches_abstract"] for r in records),
            "no_tiling_definitive": all(r["definitive"] and r["no_tiling"] for r in records if r["n"] <= exact_up_to),
            "solved_no_tiling": all(r["no_tiling"] for r in solved),
        },
        csv_fields=("n", "semidegree", "abstract_formula", "stated_formula", "ceil_formula", "no_tiling", "definitive"),
    )


def sample_dense_graph(n: int, seed: int, drop: float = 0.25) -> OrientedGraph:
    """Random oriented graph with semidegree at least ceil(7n/18), thinned by ``drop``."""
    return random_with_min_semidegree(n, semidegree_threshold(n), seed, drop=drop)


def _near_tiling_instance(job: tuple[int, int, int | None, float]) -> dict:
    n, seed, node_limit, drop = job
    g = sample_dense_graph(n, seed, drop)
    exact = max_tiling(g, SolveBudget(node_limit=node_limit))
    pc = lex_max_tiling(g, seed=seed)
    pc.validate(g)
    exact_left = n - 3 * len(exact.tiling)
    return {
        "n": n,
        "seed": seed,
        "semidegree": g.min_semidegree(),
        "arcs": g.num_arcs(),
        "exact_leftover": exact_left,
        "optimal": exact.optimal,
        "lex_leftover": n - 3 * len(pc.T),
        "lex_budget_exhausted": pc.budget_exhausted,
        "nodes": exact.nodes,
        **tt_invariant_record(g),
    }


def sweep_near_tiling(
    n_range: Sequence[int],
    samples: int,
    seed: int = 0,
    node_limit: int | None = 200_000,
    drop: float = 0.25,
    threads: int = 1,
) -> Report:
    """Leftover of maximum tilings on sampled graphs at the semidegree threshold."""
    n_range = list(n_range)
    jobs = [(n_range[k % len(n_range)], derive_seed(seed, k), node_limit, drop) for k in range(samples)]
    records = _run_ordered(_near_tiling_instance, jobs, threads)
    for k, r in enumerate(records):
        r["index"] = k
    solved = [r for r in records if r["optimal"]]
    return Report(
        "sweep_near_tiling",
        params={"n_range": n_range, "samples": samples, "node_limit": node_limit, "drop": drop},
        seed=seed,
        records=records,
        aggregate={
            "solved": len(solved),
            "budget_exceeded": len(records) - len(solved),
            "max_exact_leftover": max((r["exact_leftover"] for r in solved), default=None),
            "max_lex_leftover": max((r["lex_leftover"] for r in records), default=None),
        },
        verdicts={
            "leftover_at_most_11": all(r["exact_leftover"] <= 11 for r in solved),
            "lex_not_better_than_exact": all(r["lex_leftover"] >= r["exact_leftover"] for r in solved),
            "tt_count_bound": all(r["tt_bound_ok"] for r in records),
        },
        csv_fields=("index", "n", "seed", "semidegree", "exact_leftover", "optimal", "lex_leftover", "tt_count"),
    )


def _absorption_instance(job: tuple[int, int, int, float, int, float]) -> dict:
    n, seed, triples, density, time_ms, pipeline_ms = job
    d = math.ceil(density * n)
    g = random_with_min_semidegree(n, d, seed)
    rng = random.Random(seed)
    found = valid = 0
    for k in range(triples):
        X = tuple(rng.sample(range(n), 3))
        a = find_absorbing_set(g, X, SolveBudget(time_ms=time_ms), seed=derive_seed(seed, k))
        if a is not None:
            found += 1
            valid += a.validate(g)
    rec = {"n": n, "seed": seed, "semidegree": g.min_semidegree(), "triples": triples, "found": found, "valid": valid}
    try:
        out = nonextremal_tile(g, seed=seed, budget=SolveBudget(time_ms=pipeline_ms))
        check = validate_tiling(g, out.tiling)
        rec["tiled"] = check.valid and check.perfect
        rec["failed_stage"] = None
    except StageFailed as exc:
        rec["tiled"] = False
        rec["failed_stage"] = exc.stage
    rec.update(tt_invariant_record(g))
    return rec


def sweep_absorption(
    seeds: Sequence[int],
    n: int = 120,
    triples: int = 100,
    density: float = 0.39,
    time_ms: int = 5000,
    pipeline_ms: int = 120_000,
    threads: int = 1,
) -> Report:
    """Absorbing-set search and the full non-extremal pipeline on dense random graphs."""
    jobs = [(n, s, triples, density, time_ms, pipeline_ms) for s in seeds]
    records = _run_ordered(_absorption_instance, jobs, threads)
    tiled = sum(r["tiled"] for r in records)
    return Report(
        "sweep_absorption",
        params={"n": n, "triples": triples, "density": density, "seeds": list(seeds)},
        records=records,
        aggregate={"tiled": tiled, "instances": len(records), "min_found_rate": min((r["found"] / r["triples"] for r in records), default=None)},
        verdicts={
            "found_rate_95": all(r["found"] >= 0.95 * r["triples"] for r in records),
            "all_valid": all(r["valid"] == r["found"] for r in records),
            "pipeline_18_of_20": tiled >= math.ceil(0.9 * len(records)),
            "tt_count_bound": all(r["tt_bound_ok"] for r in records),
        },
        csv_fields=("n", "seed", "semidegree", "found", "valid", "tiled", "failed_stage"),
    )


def _extremal_pipeline_instance(job: tuple[str, int, int, int]) -> dict:
    kind, size, budget, seed = job
    if kind == "extremal":
        g, _ = extremal_graph(size)
    else:
        g, _ = c_family_graph(size, seed=seed)
        if budget:
            g = perturb(g, budget, seed=seed)
    rec = {"kind": kind, "size": size, "perturb": budget, "n": g.n}
    try:
        out = extremal_tile(g, seed=seed)
        check = validate_tiling(g, out.tiling)
        rec.update(tiled=check.valid and check.perfect, failed_stage=None)
    except StageFailed as exc:
        rec.update(tiled=False, failed_stage=exc.stage)
    rec.update(tt_invariant_record(g))
    return rec


def sweep_extremal_pipeline(
    ms: Sequence[int] = range(1, 9),
    perturbed_ms: Sequence[int] = range(4, 9),
    extremal_ns: Sequence[int] = (18, 27, 36),
    seed: int = 0,
    threads: int = 1,
) -> Report:
    """The extremal pipeline on C-family members (plain and perturbed) and on extremal graphs."""
    jobs = [("cfamily", m, 0, seed) for m in ms]
    jobs += [("cfamily", m, 1, seed) for m in perturbed_ms]
    jobs += [("extremal", n, 0, seed) for n in extremal_ns]
    records = _run_ordered(_extremal_pipeline_instance, jobs, threads)
    fam = [r for r in records if r["kind"] == "cfamily"]
    ext = [r for r in records if r["kind"] == "extremal"]
    return Report(
        "sweep_extremal_pipeline",
        params={"ms": list(ms), "perturbed_ms": list(perturbed_ms), "extremal_ns": list(extremal_ns)},
        seed=seed,
        records=records,
        aggregate={"cfamily_tiled": sum(r["tiled"] for r in fam), "cfamily": len(fam)},
        verdicts={
            "cfamily_tiled": all(r["tiled"] for r in fam),
            "extremal_stage_failed": all(not r["tiled"] and r["failed_stage"] for r in ext),
            "tt_count_bound": all(r["tt_bound_ok"] for r in records),
        },
        csv_fields=("kind", "size", "perturb", "n", "tiled", "failed_stage"),
    )


def small_exhaustive_probe(include_nine: bool = True) -> Report:
    """Exhaustive tiling checks on the smallest cases."""
    cases = [(3, 0), (3, 1), (6, 3)]
    if include_nine:
        cases.append((9, 4))
    records = []
    for n, d in cases:
        if 2 * d > n - 1:
            records.append({"n": n, "min_semidegree": d, "labeled_instances": 0, "non_tileable_count": 0, "note": "infeasible bound"})
            continue
        rep = decide_small_exhaustive(n, d)
        records.append(rep.to_json())
    by = {(r["n"], r["min_semidegree"]): r for r in records}
    verdicts = {
        "n3_d1_only_cycle": [c["tileable"] for c in by[(3, 1)]["classes"]] == [False]
        and by[(3, 1)]["classes"][0]["tournament"],
        "n6_d3_empty": by[(6, 3)]["labeled_instances"] == 0,
    }
    if include_nine:
        verdicts["n9_d4_all_tile"] = by[(9, 4)]["non_tileable_count"] == 0
    return Report(
        "small_exhaustive_probe",
        params={"cases": [list(c) for c in cases]},
        records=records,
        verdicts=verdicts,
        csv_fields=("n", "min_semidegree", "labeled_instances", "non_tileable_count"),
    )

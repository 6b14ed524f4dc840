"""Exact decision and optimisation for TT3-tilings.

Candidate tiles are all transitive triangles of the graph, stored as
``(mask, s, m, t)`` tuples.  Perfect tilings are found by exact-cover
search that always branches on the uncovered vertex with the fewest live
candidates (lowest id on ties).  Maximum tilings use the same branching
plus a "leave this vertex uncovered" branch, pruned by

* ``covered/3 + min(remaining // 3, live candidates)`` at every node, and
* an LP-relaxation bound (fractional triangle packing) at the root.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from .graph import (
    OrientedGraph,
    Tiling,
    TransitiveTriangle,
    bits,
    enumerate_transitive_triangles,
    validate_tiling,
)


class InfeasibleBound(ValueError):
    pass


@dataclass(frozen=True)
class SolveBudget:
    node_limit: int | None = None
    time_ms: int | None = None

    def __post_init__(self) -> None:
        for name in ("node_limit", "time_ms"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")


UNLIMITED = SolveBudget()


class Status(str, enum.Enum):
    TILING = "tiling"
    NO_TILING = "no_tiling"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass
class SolveOutcome:
    status: Status
    tiling: Tiling | None = None
    nodes: int = 0
    elapsed_ms: float = 0.0
    certificate: str | None = None
    stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status is Status.TILING

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "tiles": self.tiling.as_lists() if self.tiling is not None else None,
            "nodes": self.nodes,
            "wall_ms": round(self.elapsed_ms, 3),
            "certificate": self.certificate,
            **({"stats": self.stats} if self.stats else {}),
        }


@dataclass
class MaxTilingResult:
    tiling: Tiling
    optimal: bool
    upper_bound: int
    nodes: int = 0
    elapsed_ms: float = 0.0

    def __iter__(self):
        # unpacks as (tiling, optimal)
        return iter((self.tiling, self.optimal))

    def to_json(self) -> dict:
        return {
            "status": "optimal" if self.optimal else "budget_exceeded",
            "tiles": self.tiling.as_lists(),
            "size": len(self.tiling),
            "upper_bound": self.upper_bound,
            "nodes": self.nodes,
            "wall_ms": round(self.elapsed_ms, 3),
        }


class _OutOfBudget(Exception):
    pass


class _Clock:
    def __init__(self, budget: SolveBudget):
        self.budget = budget
        self.nodes = 0
        self.start = time.perf_counter()
        self.deadline = None if budget.time_ms is None else self.start + budget.time_ms / 1000

    def tick(self) -> None:
        self.nodes += 1
        limit = self.budget.node_limit
        if limit is not None and self.nodes > limit:
            raise _OutOfBudget
        if self.deadline is not None and (self.nodes & 63) == 0 and time.perf_counter() > self.deadline:
            raise _OutOfBudget

    @property
    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.start) * 1000


def _candidates(g: OrientedGraph) -> list[tuple[int, int, int, int]]:
    return [(t.mask, t.source, t.middle, t.sink) for t in enumerate_transitive_triangles(g)]


def _counts(live, n: int) -> list[int]:
    cnt = [0] * n
    for _, a, b, c in live:
        cnt[a] += 1
        cnt[b] += 1
        cnt[c] += 1
    return cnt


def lp_packing_bound(n: int, cands) -> float:
    """Optimum of the fractional triangle packing LP (an upper bound on any tiling)."""
    if not cands:
        return 0.0
    k = len(cands)
    rows = np.fromiter((v for _, a, b, c in cands for v in (a, b, c)), dtype=np.int64, count=3 * k)
    cols = np.repeat(np.arange(k), 3)
    A = csr_matrix((np.ones(3 * k), (rows, cols)), shape=(n, k))
    res = linprog(-np.ones(k), A_ub=A, b_ub=np.ones(n), bounds=(0, 1), method="highs")
    if res.status != 0:
        return float(n // 3)
    return -res.fun


def _lp_floor(value: float) -> int:
    return int(np.floor(value + 1e-7))


def find_perfect_tiling(
    g: OrientedGraph, budget: SolveBudget = UNLIMITED, use_lp: bool = True
) -> SolveOutcome:
    clock = _Clock(budget)
    n = g.n
    if n % 3:
        return SolveOutcome(Status.NO_TILING, nodes=0, elapsed_ms=clock.elapsed_ms, certificate="n_not_divisible_by_3")
    if n == 0:
        return SolveOutcome(Status.TILING, Tiling([]), certificate="empty")
    cands = _candidates(g)
    need = n // 3
    if use_lp and cands:
        lp = lp_packing_bound(n, cands)
        if _lp_floor(lp) < need:
            return SolveOutcome(
                Status.NO_TILING,
                nodes=0,
                elapsed_ms=clock.elapsed_ms,
                certificate="lp_bound",
                stats={"lp_bound": round(lp, 6), "candidates": len(cands)},
            )
    chosen: list[tuple[int, int, int, int]] = []

    def search(uncovered: int, live) -> bool:
        clock.tick()
        if not uncovered:
            return True
        cnt = _counts(live, n)
        best_v, best_c = -1, None
        for v in bits(uncovered):
            c = cnt[v]
            if best_c is None or c < best_c:
                best_v, best_c = v, c
                if c == 0:
                    return False
        bit = 1 << best_v
        for cand in live:
            if cand[0] & bit:
                chosen.append(cand)
                cm = cand[0]
                if search(uncovered & ~cm, [d for d in live if not d[0] & cm]):
                    return True
                chosen.pop()
        return False

    try:
        ok = search((1 << n) - 1, cands)
    except _OutOfBudget:
        return SolveOutcome(Status.BUDGET_EXCEEDED, nodes=clock.nodes, elapsed_ms=clock.elapsed_ms)
    if not ok:
        return SolveOutcome(
            Status.NO_TILING, nodes=clock.nodes, elapsed_ms=clock.elapsed_ms, certificate="exhausted"
        )
    tiling = Tiling([TransitiveTriangle(s, m, t) for _, s, m, t in chosen])
    check = validate_tiling(g, tiling)
    assert check.valid and check.perfect, check.error
    return SolveOutcome(Status.TILING, tiling, nodes=clock.nodes, elapsed_ms=clock.elapsed_ms, certificate="witness")


def greedy_tiling(g: OrientedGraph, cands=None) -> list[tuple[int, int, int, int]]:
    """Fail-first greedy: repeatedly tile the vertex with fewest live candidates."""
    live = _candidates(g) if cands is None else list(cands)
    uncovered = (1 << g.n) - 1
    picked = []
    while live:
        cnt = _counts(live, g.n)
        v = min((u for u in bits(uncovered) if cnt[u]), key=lambda u: (cnt[u], u))
        bit = 1 << v
        # the candidate through v whose other vertices are least contested
        cand = min((c for c in live if c[0] & bit), key=lambda c: cnt[c[1]] + cnt[c[2]] + cnt[c[3]])
        picked.append(cand)
        uncovered &= ~cand[0]
        live = [d for d in live if not d[0] & cand[0]]
    return picked


def max_tiling(g: OrientedGraph, budget: SolveBudget = UNLIMITED, use_lp: bool = True) -> MaxTilingResult:
    """Maximum TT3-tiling by branch and bound, seeded with the greedy tiling."""
    clock = _Clock(budget)
    n = g.n
    cands = _candidates(g)
    best = list(greedy_tiling(g, cands))
    upper = n // 3
    if use_lp and cands and len(best) < upper:
        upper = min(upper, _lp_floor(lp_packing_bound(n, cands)))
    if not cands:
        upper = 0
    chosen: list = []

    def search(uncovered: int, live) -> None:
        nonlocal best
        clock.tick()
        if len(chosen) > len(best):
            best = list(chosen)
            if len(best) >= upper:
                raise _Done
        if not live:
            return
        cnt = _counts(live, n)
        alive = 0
        best_v, best_c = -1, None
        for v in bits(uncovered):
            c = cnt[v]
            if c:
                alive |= 1 << v
                if best_c is None or c < best_c:
                    best_v, best_c = v, c
        bound = len(chosen) + min(alive.bit_count() // 3, len(live))
        if bound <= len(best):
            return
        bit = 1 << best_v
        for cand in live:
            if cand[0] & bit:
                chosen.append(cand)
                cm = cand[0]
                search(alive & ~cm, [d for d in live if not d[0] & cm])
                chosen.pop()
        # leave best_v uncovered
        search(alive & ~bit, [d for d in live if not d[0] & bit])

    optimal = True
    if len(best) < upper:
        try:
            search((1 << n) - 1, cands)
        except _Done:
            pass
        except _OutOfBudget:
            optimal = False
    tiling = Tiling([TransitiveTriangle(s, m, t) for _, s, m, t in best])
    assert validate_tiling(g, tiling).valid
    if optimal:
        upper = len(tiling)
    return MaxTilingResult(tiling, optimal, upper, nodes=clock.nodes, elapsed_ms=clock.elapsed_ms)


class _Done(Exception):
    pass


# -- exhaustive small-n enumeration ---------------------------------------------


@dataclass
class ExhaustiveReport:
    n: int
    min_semidegree: int
    instances: int
    tileable: int
    non_tileable: list[list[tuple[int, int]]]
    symmetry_factor: int = 1
    note: str = ""
    classes: list[dict] = field(default_factory=list)

    @property
    def labeled_instances(self) -> int:
        return self.instances * self.symmetry_factor

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "min_semidegree": self.min_semidegree,
            "instances_enumerated": self.instances,
            "symmetry_factor": self.symmetry_factor,
            "labeled_instances": self.labeled_instances,
            "tileable": self.tileable,
            "non_tileable_count": len(self.non_tileable),
            "non_tileable": [[list(a) for a in arcs] for arcs in self.non_tileable[:50]],
            "classes": self.classes,
            "note": self.note,
        }


def enumerate_oriented_graphs(n: int, d: int, fix_first_out: bool = False):
    """Yield out-mask lists of all labeled oriented graphs on n vertices with semidegree >= d.

    Pairs are decided in lexicographic order with pruning on the remaining
    capacity of every vertex.  With ``fix_first_out`` (only valid when
    ``2d == n-1``, which forces regular tournaments) vertex 0 is pinned to
    out-neighbourhood ``{1..d}``.
    """
    if 2 * d > n - 1 and n > 0:
        return
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    remaining = [n - 1] * n  # undecided pairs per vertex
    out = [0] * n
    outdeg = [0] * n
    indeg = [0] * n
    choices_first = {}
    if fix_first_out:
        if 2 * d != n - 1:
            raise ValueError("fix_first_out requires 2d == n-1")
        for j in range(1, n):
            choices_first[(0, j)] = 1 if j <= d else 2

    def feasible(v: int) -> bool:
        return max(0, d - outdeg[v]) + max(0, d - indeg[v]) <= remaining[v]

    def rec(k: int):
        if k == len(pairs):
            yield list(out)
            return
        i, j = pairs[k]
        options = (choices_first[(i, j)],) if (i, j) in choices_first else (0, 1, 2)
        remaining[i] -= 1
        remaining[j] -= 1
        for opt in options:
            if opt == 1:
                out[i] |= 1 << j
                outdeg[i] += 1
                indeg[j] += 1
            elif opt == 2:
                out[j] |= 1 << i
                outdeg[j] += 1
                indeg[i] += 1
            if feasible(i) and feasible(j):
                yield from rec(k + 1)
            if opt == 1:
                out[i] &= ~(1 << j)
                outdeg[i] -= 1
                indeg[j] -= 1
            elif opt == 2:
                out[j] &= ~(1 << i)
                outdeg[j] -= 1
                indeg[i] -= 1
        remaining[i] += 1
        remaining[j] += 1

    yield from rec(0)


def canonical_form(out_masks: list[int]) -> tuple[int, ...]:
    """Lexicographically least relabelled out-mask tuple (brute force, small n only)."""
    n = len(out_masks)
    best = None
    for perm in itertools.permutations(range(n)):
        relabeled = [0] * n
        for u in range(n):
            m = 0
            for v in bits(out_masks[u]):
                m |= 1 << perm[v]
            relabeled[perm[u]] = m
        key = tuple(relabeled)
        if best is None or key < best:
            best = key
    return best


def decide_small_exhaustive(n: int, min_semideg: int, budget: SolveBudget = UNLIMITED) -> ExhaustiveReport:
    """Enumerate every labeled oriented graph meeting the semidegree bound; report non-tileable ones.

    Regular-tournament cases (``2d == n-1``) are enumerated with vertex 0's
    out-neighbourhood pinned to ``{1..d}``; every labeled instance is
    isomorphic to one of these and the report scales counts by C(n-1, d).
    """
    if n > 9:
        raise ValueError("exhaustive enumeration is limited to n <= 9")
    if min_semideg > (n - 1) // 2:
        raise InfeasibleBound(f"min semidegree {min_semideg} impossible on {n} vertices")
    regular = n > 1 and 2 * min_semideg == n - 1
    factor = 1
    if regular and n > 3:
        from math import comb

        factor = comb(n - 1, min_semideg)
    instances = tileable = 0
    bad: list[list[tuple[int, int]]] = []
    by_class: dict[tuple, dict] = {}
    for out in enumerate_oriented_graphs(n, min_semideg, fix_first_out=regular and n > 3):
        instances += 1
        g = OrientedGraph.from_masks(out)
        res = find_perfect_tiling(g, budget, use_lp=False)
        if res.status is Status.BUDGET_EXCEEDED:
            raise RuntimeError("budget exceeded during exhaustive enumeration")
        ok = res.status is Status.TILING
        tileable += ok
        if not ok:
            bad.append(g.arcs())
        if n <= 4:
            key = canonical_form(out)
            entry = by_class.setdefault(
                key,
                {"arcs": g.arcs(), "tournament": g.is_tournament(), "tileable": ok, "labelings": 0},
            )
            entry["labelings"] += 1
    note = ""
    if regular and n > 3:
        note = f"vertex 0 pinned to out-set 1..{min_semideg}; multiply counts by {factor} for labeled totals"
    classes = [
        {**v, "arcs": [list(a) for a in v["arcs"]]}
        for _, v in sorted(by_class.items())
    ]
    return ExhaustiveReport(n, min_semideg, instances, tileable, bad, factor, note, classes)


class StageFailed(RuntimeError):
    """A constructive pipeline could not complete; ``stage`` names where it stopped."""

    def __init__(self, stage: str, diagnostic: str = "", trace: list | None = None):
        self.stage = stage
        self.diagnostic = diagnostic
        self.trace = trace or []
        super().__init__(f"stage {stage!r} failed: {diagnostic}")

    def to_json(self) -> dict:
        return {"status": "stage_failed", "stage": self.stage, "diagnostic": self.diagnostic, "trace": self.trace}

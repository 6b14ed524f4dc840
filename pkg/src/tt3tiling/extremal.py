"""Tiling graphs that sit close to the extremal construction.

The pipeline finds a large TT3-free set, splits it into a cyclic triple,
labels every vertex against that triple, removes a few triangles in three
balancing stages and finishes with two rounds of bipartite matching.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .exact import SolveBudget, SolveOutcome, StageFailed, Status
from .graph import (
    OrientedGraph,
    Tiling,
    TransitiveTriangle,
    bits,
    enumerate_cyclic_triangles,
    mask_of,
    transitive_triangle_on,
    validate_tiling,
)
from .matching import HallViolation, bipartite_matching, hall_perfect_matching, max_matching, random_equitable_split
from .nonextremal import tt_partners

log = logging.getLogger(__name__)


class NoCyclicTriangle(StageFailed):
    def __init__(self, diagnostic: str = "no cyclic triangle inside W"):
        super().__init__("cyclic_partition", diagnostic)


class PlacementFailed(StageFailed):
    def __init__(self, v: int):
        self.vertex = v
        super().__init__("cyclic_partition", f"vertex {v} is not (i,0)-cyclic for any i")


class NotExtremal(StageFailed):
    def __init__(self, diagnostic: str):
        super().__init__("witness", diagnostic)


class BalanceFailed(StageFailed):
    def __init__(self, diagnostic: str, deficit: int):
        self.deficit = deficit
        super().__init__("balance", diagnostic)


class AbsorbFailed(StageFailed):
    def __init__(self, z: int):
        self.vertex = z
        super().__init__("absorb_bad", f"no standard triangle available for bad vertex {z}")


class EqualizeFailed(StageFailed):
    def __init__(self, diagnostic: str):
        super().__init__("equalize", diagnostic)


class FinishFailed(StageFailed):
    def __init__(self, diagnostic: str, vertex: int | None = None):
        self.vertex = vertex
        super().__init__("finish", diagnostic)


@dataclass(frozen=True)
class ExtremalConfig:
    """Thresholds for the extremal pipeline.

    The "desk" preset uses fixed small fractions; the "paper" preset follows
    the asymptotic relations tau = beta/288 and alpha = tau^3 and also
    records the separate finishing value 16*18*tau.  Both beta values are
    logged; with tau = beta/288 they coincide numerically.
    """

    name: str = "desk"
    alpha: float = 0.01
    tau: float = 0.05
    gamma: float = 0.05
    lam: float = 0.05
    beta: float | None = None
    beta_finish: float | None = None
    finish_retries: int = 50

    @classmethod
    def preset(cls, name: str) -> ExtremalConfig:
        if name == "desk":
            return cls()
        if name == "paper":
            beta = 1 / 24
            tau = beta / 288
            return cls("paper", tau**3, tau, tau, tau, beta, 16 * 18 * tau)
        raise ValueError(f"unknown preset {name!r}")

    def to_json(self) -> dict:
        return {
            "preset": self.name,
            "alpha": self.alpha,
            "tau": self.tau,
            "gamma": self.gamma,
            "lambda": self.lam,
            "beta": self.beta,
            "beta_finish": self.beta_finish,
        }


@dataclass
class CyclicTriple:
    W1: frozenset[int]
    W2: frozenset[int]
    W3: frozenset[int]

    @property
    def parts(self) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
        return (self.W1, self.W2, self.W3)

    @property
    def union(self) -> frozenset[int]:
        return self.W1 | self.W2 | self.W3

    def masks(self) -> tuple[int, int, int]:
        return tuple(mask_of(p) for p in self.parts)

    def is_gamma_cyclic(self, g: OrientedGraph, gamma: float) -> bool:
        return all(cyclicity(g, self.masks(), v, i) <= gamma * g.n for i, p in enumerate(self.parts) for v in p)

    def is_lambda_equitable(self, n: int, lam: float) -> bool:
        sizes = [len(p) for p in self.parts]
        return max(sizes) - min(sizes) <= lam * n and sum(sizes) >= (2 / 3 - lam) * n

    def to_json(self) -> dict:
        return {"W1": sorted(self.W1), "W2": sorted(self.W2), "W3": sorted(self.W3)}


def cyclicity(g: OrientedGraph, masks: tuple[int, int, int], v: int, i: int) -> int:
    """``d+(v, W_{i-1}) + d(v, W_i) + d-(v, W_{i+1})`` with parts indexed 0..2."""
    prev, cur, nxt = masks[(i - 1) % 3], masks[i], masks[(i + 1) % 3]
    return (
        (g.out_mask(v) & prev).bit_count()
        + (g.nbr_mask(v) & cur).bit_count()
        + (g.in_mask(v) & nxt).bit_count()
    )


def cyclic_label(g: OrientedGraph, masks, v: int, threshold: float) -> int | None:
    """Smallest part index i with v (i, threshold)-cyclic, or None when v is bad."""
    for i in range(3):
        if cyclicity(g, masks, v, i) <= threshold:
            return i
    return None


# -- TT3-free witness and cyclic partition ------------------------------------------------


def adjacency_matrix(g: OrientedGraph) -> np.ndarray:
    """Dense 0/1 matrix with ``A[u, v] = 1`` iff ``u -> v``."""
    A = np.zeros((g.n, g.n), dtype=np.int64)
    for u, v in g.arcs():
        A[u, v] = 1
    return A


def tt_counts(A: np.ndarray) -> np.ndarray:
    """Number of transitive triangles through each vertex of the graph with arc matrix ``A``."""
    AA = A @ A
    as_source = (AA * A).sum(axis=1)
    as_sink = (AA * A).sum(axis=0)
    as_middle = (A.T * (A @ A.T)).sum(axis=1)
    return as_source + as_middle + as_sink


def _makes_tt(g: OrientedGraph, W: int, v: int) -> bool:
    return any(tt_partners(g, v, w) & W for w in bits(g.nbr_mask(v) & W))


def find_tt3_free_witness(
    g: OrientedGraph, min_size: int = 0, max_seeds: int = 12, seed: int = 0
) -> frozenset[int] | None:
    """Large vertex set W with G[W] free of transitive triangles.

    Seeds from cyclic triangles ``w1 w2 w3``: the sets
    ``N+(w_{i-1}) ∩ N-(w_{i+1})`` are merged, vertices lying in the most
    transitive triangles are deleted until none remain, and then every
    other vertex that creates no transitive triangle is added back.
    Returns the largest set found, or None if it is smaller than
    ``min_size`` (or no cyclic triangle exists and ``min_size > 2``).
    """
    rng = random.Random(seed)
    triangles = enumerate_cyclic_triangles(g)
    if not triangles:
        return frozenset() if min_size <= 0 else None
    picks = triangles[: max_seeds // 2]
    rest = triangles[max_seeds // 2:]
    picks += rng.sample(rest, min(len(rest), max_seeds - len(picks)))
    A = adjacency_matrix(g)
    best = 0
    for tri in picks:
        W = 0
        for i in range(3):
            W |= g.out_mask(tri[i - 1]) & g.in_mask(tri[(i + 1) % 3])
        while W:
            idx = np.fromiter(bits(W), dtype=np.int64)
            counts = tt_counts(A[np.ix_(idx, idx)])
            k = int(np.argmax(counts))  # first maximum, i.e. lowest id on ties
            if counts[k] == 0:
                break
            W &= ~(1 << int(idx[k]))
        for v in range(g.n):
            if not W >> v & 1 and not _makes_tt(g, W, v):
                W |= 1 << v
        if W.bit_count() > best.bit_count():
            best = W
    result = frozenset(bits(best))
    if len(result) < min_size:
        return None
    return result


def is_tt3_free(g: OrientedGraph, W) -> bool:
    W = mask_of(W)
    return not any(_makes_tt(g, W, v) for v in bits(W))


def cyclic_partition(g: OrientedGraph, W) -> CyclicTriple:
    """0-cyclic partition of a TT3-free set W.

    Tries cyclic triangles of G[W] in lexicographic order; for each, the
    core sets ``N+(w_{i-1}) ∩ N-(w_{i+1}) ∩ W`` are extended by repeatedly
    placing a leftover vertex into the first part for which it is
    (i, 0)-cyclic.  The result is verified 0-cyclic before it is returned.
    """
    Wset = sorted(set(W))
    sub, old = g.induced(Wset)
    tris = enumerate_cyclic_triangles(sub)
    if not tris:
        raise NoCyclicTriangle()
    Wmask = mask_of(Wset)
    last_stuck = None
    for tri in tris[:20]:
        w = [old[t] for t in tri]
        parts = [g.out_mask(w[i - 1]) & g.in_mask(w[(i + 1) % 3]) & Wmask for i in range(3)]
        placed = parts[0] | parts[1] | parts[2]
        left = [v for v in Wset if not placed >> v & 1]
        progress = True
        while left and progress:
            progress = False
            nxt = []
            for v in left:
                i = cyclic_label(g, tuple(parts), v, 0)
                if i is None:
                    nxt.append(v)
                else:
                    parts[i] |= 1 << v
                    progress = True
            left = nxt
        if left:
            last_stuck = left[0]
            continue
        masks = tuple(parts)
        bad = [v for i in range(3) for v in bits(parts[i]) if cyclicity(g, masks, v, i) != 0]
        if bad:
            last_stuck = bad[0]
            continue
        return CyclicTriple(*(frozenset(bits(p)) for p in parts))
    raise PlacementFailed(last_stuck)


# -- classification -----------------------------------------------------------------------


@dataclass
class ExtremalDecomposition:
    n: int
    triple: CyclicTriple
    labels: dict[int, int | None]
    U: frozenset[int]
    Z: frozenset[int]
    Z_parts: tuple[frozenset[int], frozenset[int], frozenset[int]]
    W_prime: tuple[frozenset[int], frozenset[int], frozenset[int]]
    U_prime: frozenset[int]
    Z_prime: frozenset[int]
    gamma: float
    tau: float

    @property
    def Z_double_prime(self) -> frozenset[int]:
        return self.Z_parts[0] | self.Z_parts[1] | self.Z_parts[2]

    @property
    def W_prime_union(self) -> frozenset[int]:
        return self.W_prime[0] | self.W_prime[1] | self.W_prime[2]

    @property
    def bad(self) -> list[int]:
        return sorted(v for v, lab in self.labels.items() if lab is None)

    def to_json(self) -> dict:
        return {
            "triple": self.triple.to_json(),
            "sizes": [len(p) for p in self.triple.parts],
            "U": sorted(self.U),
            "Z": sorted(self.Z),
            "Z_parts": [sorted(z) for z in self.Z_parts],
            "W_prime_sizes": [len(p) for p in self.W_prime],
            "U_prime": len(self.U_prime),
            "Z_prime": sorted(self.Z_prime),
            "bad": self.bad,
            "gamma": self.gamma,
            "tau": self.tau,
        }


def classify_vertices(g: OrientedGraph, triple: CyclicTriple, gamma: float, tau: float | None = None) -> ExtremalDecomposition:
    """Label every vertex by its smallest cyclic index (or bad) and derive Z, Z(i), W', U', Z'."""
    tau = gamma if tau is None else tau
    n = g.n
    masks = triple.masks()
    labels = {v: cyclic_label(g, masks, v, gamma * n) for v in range(n)}
    W = triple.union
    Wmask = mask_of(W)
    U = frozenset(range(n)) - W
    Z = frozenset(u for u in U if (g.nbr_mask(u) & Wmask).bit_count() < len(W) - tau * n)
    tau_labels = {z: cyclic_label(g, masks, z, tau * n) for z in Z}
    Zp = tuple(frozenset(z for z in Z if tau_labels[z] == i) for i in range(3))
    Zpp = Zp[0] | Zp[1] | Zp[2]
    Wp = tuple(triple.parts[i] | Zp[i] for i in range(3))
    return ExtremalDecomposition(n, triple, labels, U, Z, Zp, Wp, U - Zpp, Z - Zpp, gamma, tau)


def check_good_degs(g: OrientedGraph, dec: ExtremalDecomposition, lam: float) -> list[dict]:
    """Vertices whose in/out degrees toward neighbouring parts fall short.

    For an (i, gamma)-cyclic vertex of a lambda-equitable triple one expects
    ``d-(v, W_{i-1}) >= |W_{i-1}| - (gamma+lambda) n`` and the mirror bound
    toward ``W_{i+1}``.  Returns the violations (empty when all hold).
    """
    n = g.n
    parts = dec.triple.parts
    masks = dec.triple.masks()
    slack = (dec.gamma + lam) * n
    out = []
    for v, i in sorted(dec.labels.items()):
        if i is None:
            continue
        din = (g.in_mask(v) & masks[(i - 1) % 3]).bit_count()
        dout = (g.out_mask(v) & masks[(i + 1) % 3]).bit_count()
        if din < len(parts[(i - 1) % 3]) - slack or dout < len(parts[(i + 1) % 3]) - slack:
            out.append({"vertex": v, "part": i, "in_prev": din, "out_next": dout})
    return out


# -- balancing stages -------------------------------------------------------------------


@dataclass
class BalancingPlan:
    dec: ExtremalDecomposition
    T1: list[tuple[TransitiveTriangle, str]] = field(default_factory=list)
    T2: list[tuple[TransitiveTriangle, str]] = field(default_factory=list)
    T3: list[tuple[TransitiveTriangle, str]] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def X(self, i: int) -> frozenset[int]:
        tiles = (self.T1, self.T2, self.T3)[i - 1]
        return frozenset(v for t, _ in tiles for v in t)

    def Y(self, i: int) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for j in range(1, i + 1):
            out |= self.X(j)
        return out

    def p1(self, i: int) -> bool:
        Y = self.Y(i)
        return len(self.dec.W_prime_union - Y) == 2 * len(self.dec.U_prime - Y)

    def residual_parts(self) -> tuple[frozenset[int], ...]:
        Y = self.Y(3)
        return tuple(p - Y for p in self.dec.W_prime)

    def residual_U(self) -> frozenset[int]:
        return self.dec.U_prime - self.Y(3)

    def tiles(self) -> list[TransitiveTriangle]:
        return [t for t, _ in self.T1 + self.T2 + self.T3]

    def to_json(self) -> dict:
        return {
            "T1": [[list(t), role] for t, role in self.T1],
            "T2": [[list(t), role] for t, role in self.T2],
            "T3": [[list(t), role] for t, role in self.T3],
            "checks": dict(self.checks),
            "notes": list(self.notes),
        }


def _match_edges_to_vertices(g, edges, pool: list[int], need: int, completes) -> list[tuple[tuple[int, int], int]]:
    """Match ``need`` of the edges to distinct pool vertices with ``completes(edge, v)``."""
    adj = {i: [v for v in pool if completes(e, v)] for i, e in enumerate(edges)}
    pairs = bipartite_matching(list(range(len(edges))), adj)
    chosen = sorted(pairs.items())[:need]
    return [(edges[i], v) for i, v in chosen]


def _completes(g: OrientedGraph):
    def test(e, v):
        return bool(tt_partners(g, e[0], e[1]) >> v & 1)

    return test


def balance_stage1(g: OrientedGraph, dec: ExtremalDecomposition) -> BalancingPlan:
    """Remove |c| triangles, c = |W'| - 2n/3, so that |W' \\ X1| = 2|U' \\ X1|.

    For c > 0 a matching inside each oversized W'_i is completed by a common
    neighbour in the adjacent parts; for c < 0 a matching inside U \\ Z is
    completed by a vertex of W'.
    """
    plan = BalancingPlan(dec)
    n = g.n
    Wp = dec.W_prime
    Wunion = dec.W_prime_union
    if 3 * len(Wunion) - 2 * n == 0 or n % 3:
        plan.checks["P1_stage1"] = plan.p1(1)
        return plan
    c3 = 3 * len(Wunion) - 2 * n  # 3c, kept integral
    if c3 % 3:
        raise BalanceFailed(f"|W'| - 2n/3 is not an integer (3c={c3})", abs(c3))
    c = c3 // 3
    done = 0
    used = 0
    completes = _completes(g)
    if c > 0:
        cap = 2 * n // 9
        for i in range(3):
            if done >= c:
                break
            ci = len(Wp[i]) - cap
            if ci <= 0:
                continue
            verts = sorted(Wp[i])
            idx = {v: k for k, v in enumerate(verts)}
            edges = [(idx[u], idx[v]) for u in verts for v in bits(g.out_mask(u) & mask_of(verts))]
            matching = [(verts[a], verts[b]) for a, b in max_matching(len(verts), edges)]
            want = min(ci, c - done)
            pool = sorted((Wunion - Wp[i]) - frozenset(bits(used)))
            got = _match_edges_to_vertices(g, matching, pool, want, completes)
            for (a, b), v in got:
                t = transitive_triangle_on(g, a, b, v)
                plan.T1.append((t, f"W'{i + 1}-pair"))
                used |= t.mask
            done += len(got)
        if done < c:
            raise BalanceFailed(f"found {done} of {c} triangles inside W'", c - done)
    else:
        need = -c
        U2 = sorted(dec.U - dec.Z)
        idx = {v: k for k, v in enumerate(U2)}
        edges = [(idx[u], idx[v]) for u in U2 for v in bits(g.out_mask(u) & mask_of(U2))]
        matching = [(U2[a], U2[b]) for a, b in max_matching(len(U2), edges)]
        got = _match_edges_to_vertices(g, matching, sorted(Wunion), need, completes)
        for (a, b), v in got:
            plan.T1.append((transitive_triangle_on(g, a, b, v), "U''-pair"))
        if len(got) < need:
            raise BalanceFailed(f"found {len(got)} of {need} triangles with two U'' vertices", need - len(got))
    plan.checks["P1_stage1"] = plan.p1(1)
    if not plan.checks["P1_stage1"]:
        raise BalanceFailed("P1 fails after stage 1", 0)
    return plan


def absorb_bad_vertices(g: OrientedGraph, plan: BalancingPlan) -> BalancingPlan:
    """Cover every bad vertex of Z' \\ X1 by a standard triangle (two W' vertices, itself)."""
    dec = plan.dec
    blocked = mask_of(plan.Y(1))
    Wmask = mask_of(dec.W_prime_union)
    for z in sorted(dec.Z_prime - plan.Y(1)):
        found = None
        cand = g.nbr_mask(z) & Wmask & ~blocked
        for a in bits(cand):
            rest = tt_partners(g, z, a) & Wmask & ~blocked & ~(1 << a)
            if rest:
                b = (rest & -rest).bit_length() - 1
                found = transitive_triangle_on(g, z, a, b)
                break
        if found is None:
            raise AbsorbFailed(z)
        plan.T2.append((found, "standard"))
        blocked |= found.mask
    plan.checks["P1_stage2"] = plan.p1(2)
    plan.checks["P2"] = dec.Z_prime <= plan.Y(2)
    if not plan.checks["P1_stage2"]:
        raise StageFailed("absorb_bad", "P1 fails after stage 2")
    return plan


def _cross_matching(g, A: list[int], B: list[int], size: int, blocked: int) -> list[tuple[int, int]]:
    Bm = mask_of(B) & ~blocked
    adj = {a: list(bits(g.nbr_mask(a) & Bm)) for a in A if not blocked >> a & 1}
    pairs = bipartite_matching(sorted(adj), adj)
    return sorted(pairs.items())[:size]


def equalize_and_divide(g: OrientedGraph, plan: BalancingPlan, tau: float | None = None) -> BalancingPlan:
    """Stage 3: standard triangles that equalise the W-parts and make 18 divide the rest."""
    dec = plan.dec
    tau = dec.tau if tau is None else tau
    n = g.n
    Y2 = plan.Y(2)
    parts = [sorted(p - Y2) for p in dec.W_prime]
    order = sorted(range(3), key=lambda i: (len(parts[i]), i))
    s1, s2, s3 = (len(parts[i]) for i in order)
    if s1 + s2 < s3:
        raise EqualizeFailed(f"parts {s1},{s2},{s3} cannot be equalised")
    blocked = mask_of(Y2)
    m1 = _cross_matching(g, parts[order[2]], parts[order[0]], s3 - s2, blocked)
    for e in m1:
        blocked |= mask_of(e)
    m2 = _cross_matching(g, parts[order[2]], parts[order[1]], s3 - s1, blocked)
    for e in m2:
        blocked |= mask_of(e)
    if len(m1) < s3 - s2 or len(m2) < s3 - s1:
        raise EqualizeFailed(f"cross matchings too small: {len(m1)}/{s3 - s2}, {len(m2)}/{s3 - s1}")
    m3 = []
    for i in range(3):
        got = _cross_matching(g, parts[i], parts[(i + 1) % 3], 1, blocked)
        if got:
            m3.append(got[0])
            blocked |= mask_of(got[0])
    residual_w = 3 * (s1 + s2 - s3)
    residual = residual_w + residual_w // 2
    # P1 and P4 make the residual a multiple of 9; the extra three edges shift it by 9
    use_m3 = residual % 18 != 0
    edges = m1 + m2 + (m3 if use_m3 else [])
    if use_m3 and len(m3) < 3:
        raise EqualizeFailed("no three cross edges available for the divisibility fix")
    pool = sorted(dec.U_prime - Y2)
    got = _match_edges_to_vertices(g, edges, pool, len(edges), _completes(g))
    if len(got) < len(edges):
        raise EqualizeFailed(f"only {len(got)} of {len(edges)} cross edges extend to standard triangles")
    for (a, b), v in got:
        plan.T3.append((transitive_triangle_on(g, a, b, v), "standard"))
    rem = plan.residual_parts()
    plan.checks["P1_stage3"] = plan.p1(3)
    plan.checks["P3"] = len(plan.Y(3)) <= tau * n
    plan.checks["P4"] = len({len(p) for p in rem}) == 1
    plan.checks["P5"] = (n - len(plan.Y(3))) % 18 == 0
    if not plan.checks["P3"]:
        raise EqualizeFailed(f"|Y3| = {len(plan.Y(3))} exceeds tau*n = {tau * n:g}")
    for key in ("P1_stage3", "P4", "P5"):
        if not plan.checks[key]:
            raise EqualizeFailed(f"{key} fails after stage 3")
    return plan


# -- finishing --------------------------------------------------------------------------------


def finish_tiling(
    g: OrientedGraph,
    parts: tuple,
    U,
    seed: int = 0,
    retries: int = 50,
) -> tuple[Tiling, dict]:
    """Perfect tiling of G[W1 ∪ W2 ∪ W3 ∪ U] for a near-C-family residual.

    Requires ``|W_i| = 4m`` and ``|U| = 6m``.  Each attempt splits every
    part into random halves, takes perfect matchings of the bipartite graphs
    between W1^1/W2^1, W2^2/W3^2 and W3^1/W1^2, and asks Hall's theorem for
    a perfect matching of U into those 6m edges where ``u`` plus the edge
    spans a transitive triangle.  Attempts use seeds derived from ``seed``.
    """
    parts = tuple(sorted(p) for p in parts)
    U = sorted(U)
    total = sum(map(len, parts)) + len(U)
    if total % 18 or any(len(p) != 4 * total // 18 for p in parts) or len(U) != total // 3:
        raise FinishFailed(f"residual shape {[len(p) for p in parts]} + {len(U)} is not (4m,4m,4m)+6m")
    if total == 0:
        return Tiling(), {"attempts": 0}
    completes = _completes(g)
    isolated = [u for u in U if not any(tt_partners(g, u, w) for w in bits(g.nbr_mask(u) & mask_of(v for p in parts for v in p)))]
    if isolated:
        raise FinishFailed(f"vertex {isolated[0]} lies in no triangle with a W-edge", isolated[0])
    worst = None
    for attempt in range(retries):
        rng = random.Random(seed * 1_000_003 + attempt)
        halves = [random_equitable_split(p, rng) for p in parts]
        pairs = [(halves[0][0], halves[1][0]), (halves[1][1], halves[2][1]), (halves[2][0], halves[0][1])]
        M = []
        ok = True
        for A, B in pairs:
            Bm = mask_of(B)
            adj = {}
            for a in A:
                nb = list(bits(g.nbr_mask(a) & Bm))
                rng.shuffle(nb)
                adj[a] = nb
            order = list(A)
            rng.shuffle(order)
            mt = bipartite_matching(order, adj)
            if len(mt) < len(A):
                ok = False
                break
            M.extend(sorted(mt.items()))
        if not ok:
            continue
        adjB = {u: [k for k, e in enumerate(M) if completes(e, u)] for u in U}
        try:
            match = hall_perfect_matching(U, list(range(len(M))), adjB)
        except HallViolation as exc:
            weak = min(exc.subset, key=lambda u: (len(adjB[u]), u))
            if worst is None or len(adjB[weak]) < worst[1]:
                worst = (weak, len(adjB[weak]))
            continue
        tiles = [transitive_triangle_on(g, u, *M[k]) for u, k in sorted(match.items())]
        return Tiling(tiles), {"attempts": attempt + 1}
    if worst is None:
        raise FinishFailed(f"no perfect matchings between parts in {retries} attempts")
    raise FinishFailed(f"Hall fails for U; weakest vertex {worst[0]} with B-degree {worst[1]}", worst[0])


def extremal_tile(
    g: OrientedGraph,
    seed: int = 0,
    budget: SolveBudget | None = None,
    config: ExtremalConfig | str = "desk",
) -> SolveOutcome:
    """Full extremal pipeline; returns a validated perfect tiling or raises StageFailed."""
    cfg = ExtremalConfig.preset(config) if isinstance(config, str) else config
    start = time.perf_counter()
    n = g.n
    trace: list[dict] = [{"stage": "config", **cfg.to_json()}]

    def fail(exc: StageFailed):
        exc.trace = trace
        return exc

    if n % 3:
        raise fail(StageFailed("input", f"n={n} is not divisible by 3"))
    min_size = math.ceil((2 / 3 - cfg.alpha) * n - 1e-9)
    W = find_tt3_free_witness(g, min_size, seed=seed)
    if W is None:
        raise fail(NotExtremal(f"no TT3-free set of size >= {min_size}"))
    trace.append({"stage": "witness", "size": len(W), "min_size": min_size})
    try:
        triple = cyclic_partition(g, W)
        trace.append({"stage": "cyclic_partition", "sizes": [len(p) for p in triple.parts]})
        dec = classify_vertices(g, triple, cfg.gamma, cfg.tau)
        trace.append({"stage": "classify", "Z": len(dec.Z), "Z_prime": len(dec.Z_prime), "bad": len(dec.bad),
                      "good_deg_violations": len(check_good_degs(g, dec, cfg.lam))})
        plan = balance_stage1(g, dec)
        trace.append({"stage": "balance", "T1": len(plan.T1)})
        absorb_bad_vertices(g, plan)
        trace.append({"stage": "absorb_bad", "T2": len(plan.T2)})
        equalize_and_divide(g, plan, cfg.tau)
        trace.append({"stage": "equalize", "T3": len(plan.T3), "checks": dict(plan.checks)})
        fin, info = finish_tiling(g, plan.residual_parts(), plan.residual_U(), seed, cfg.finish_retries)
        trace.append({"stage": "finish", **info})
    except StageFailed as exc:
        raise fail(exc) from None
    tiling = Tiling(plan.tiles()) + fin
    check = validate_tiling(g, tiling)
    if not (check.valid and check.perfect):
        raise fail(StageFailed("validate", check.error or "tiling not perfect"))
    return SolveOutcome(
        Status.TILING,
        tiling,
        elapsed_ms=(time.perf_counter() - start) * 1000,
        certificate="extremal_pipeline",
        stats={"trace": trace, "seed": seed},
    )

"""Named graph families and seeded random ensembles."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .graph import OrientedGraph, VertexSetPartition, bits


class BadN(ValueError):
    pass


class Exhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtremalSpec:
    """Part sizes of the tightness construction on ``n`` vertices."""

    n: int
    w1: int
    w2: int
    w3: int
    u1: int
    u2: int

    @classmethod
    def for_n(cls, n: int) -> ExtremalSpec:
        if n % 3 or n < 9:
            raise BadN(f"extremal graph needs n divisible by 3 and n >= 9, got {n}")
        w = [(2 * n // 3 + i) // 3 for i in (1, 2, 3)]
        u1 = (n - 3) // 6
        u2 = -(-(n - 3) // 6)
        spec = cls(n, w[0], w[1], w[2], u1, u2)
        assert sum(spec.sizes) == n
        return spec

    @property
    def sizes(self) -> tuple[int, int, int, int, int]:
        return (self.w1, self.w2, self.w3, self.u1, self.u2)

    def abstract_bound(self) -> int:
        """floor(7n/18) - 1."""
        return 7 * self.n // 18 - 1

    def stated_formula(self) -> int:
        """floor(2n/9) + floor((n-3)/6) + 1, the closed form given alongside the figure."""
        return 2 * self.n // 9 + (self.n - 3) // 6 + 1

    def w3_semidegree(self) -> int:
        """min(d+, d-) of a W3 vertex, read off the construction."""
        indeg = self.w2 + self.u1
        outdeg = self.w1 + self.u2
        return min(indeg, outdeg)


def _consecutive_blocks(names, sizes) -> dict[str, tuple[int, ...]]:
    blocks, start = {}, 0
    for name, size in zip(names, sizes):
        blocks[name] = tuple(range(start, start + size))
        start += size
    return blocks


def extremal_graph(n: int) -> tuple[OrientedGraph, VertexSetPartition]:
    """The n-vertex graph without a perfect TT3-tiling.

    Blocks W1, W2, W3, U1, U2 occupy consecutive id ranges in that order.
    """
    spec = ExtremalSpec.for_n(n)
    part = VertexSetPartition(_consecutive_blocks(("W1", "W2", "W3", "U1", "U2"), spec.sizes))
    W1, W2, W3, U1, U2 = (part[k] for k in ("W1", "W2", "W3", "U1", "U2"))
    g = OrientedGraph(n)
    families = [
        (W1, W2), (W2, W3), (W3, W1),
        (U1, U2),
        (W1 + W2, U1),
        (U1, W3),
        (U2, W1 + W2),
        (W3, U2),
    ]
    for src, dst in families:
        for u in src:
            for v in dst:
                g.add_arc(u, v)
    return g, part


def cyclic_blowup(n: int) -> OrientedGraph:
    """Blow-up of a cyclic triangle with ``|W_i| = floor((n+i-1)/3)``."""
    g, _ = cyclic_blowup_parts(n)
    return g


def cyclic_blowup_parts(n: int) -> tuple[OrientedGraph, VertexSetPartition]:
    if n < 3:
        raise BadN(f"cyclic blow-up needs n >= 3, got {n}")
    sizes = [(n + i - 1) // 3 for i in (1, 2, 3)]
    part = VertexSetPartition(_consecutive_blocks(("W1", "W2", "W3"), sizes))
    g = OrientedGraph(n)
    for i, name in enumerate(("W1", "W2", "W3")):
        nxt = ("W1", "W2", "W3")[(i + 1) % 3]
        for u in part[name]:
            for v in part[nxt]:
                g.add_arc(u, v)
    return g, part


def transitive_tournament(n: int) -> OrientedGraph:
    return OrientedGraph(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


@dataclass(frozen=True)
class CFamilySpec:
    m: int
    seed: int
    U: tuple[int, ...]
    W1: tuple[int, ...]
    W2: tuple[int, ...]
    W3: tuple[int, ...]

    @property
    def n(self) -> int:
        return 18 * self.m

    @property
    def W(self) -> tuple[int, ...]:
        return self.W1 + self.W2 + self.W3

    @property
    def parts(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        return (self.W1, self.W2, self.W3)

    def partition(self) -> VertexSetPartition:
        return VertexSetPartition({"W1": self.W1, "W2": self.W2, "W3": self.W3, "U": self.U})


def c_family_graph(m: int, seed: int = 0) -> tuple[OrientedGraph, CFamilySpec]:
    """A member of the 18m-vertex family: independent U (6m), cyclic blow-up W (3 x 4m).

    Every ``w`` in W is joined to all of U with exactly ``3m`` arcs each way.
    The pattern is circulant: inside part ``W_i`` the ``j``-th vertex sends
    arcs to the U positions ``j, j+1, ..., j+3m-1 (mod 6m)`` and receives
    from the rest; each part reads U through its own seeded permutation.
    """
    if m < 1:
        raise BadN(f"m must be positive, got {m}")
    n = 18 * m
    W1 = tuple(range(0, 4 * m))
    W2 = tuple(range(4 * m, 8 * m))
    W3 = tuple(range(8 * m, 12 * m))
    U = tuple(range(12 * m, 18 * m))
    g = OrientedGraph(n)
    parts = (W1, W2, W3)
    for i in range(3):
        for u in parts[i]:
            for v in parts[(i + 1) % 3]:
                g.add_arc(u, v)
    rng = random.Random(seed)
    for part in parts:
        order = list(U)
        rng.shuffle(order)
        for j, w in enumerate(part):
            for k, u in enumerate(order):
                if (k - j) % (6 * m) < 3 * m:
                    g.add_arc(w, u)
                else:
                    g.add_arc(u, w)
    return g, CFamilySpec(m, seed, U, W1, W2, W3)


def random_oriented_graph(n: int, arc_prob: float, seed: int = 0) -> OrientedGraph:
    """Each pair gets ``u->v`` w.p. p/2, ``v->u`` w.p. p/2, no arc otherwise."""
    if not 0.0 <= arc_prob <= 1.0:
        raise ValueError(f"arc_prob must lie in [0, 1], got {arc_prob}")
    rng = random.Random(seed)
    g = OrientedGraph(n)
    half = arc_prob / 2
    for u in range(n):
        for v in range(u + 1, n):
            r = rng.random()
            if r < half:
                g.add_arc(u, v)
            elif r < arc_prob:
                g.add_arc(v, u)
    return g


def random_tournament(n: int, seed: int = 0) -> OrientedGraph:
    return random_oriented_graph(n, 1.0, seed)


def _repair_tournament(out: list[int], n: int, d: int, rng: random.Random, steps: int) -> bool:
    """Reverse arcs until every outdegree lies in [d, n-1-d].

    Each step reverses one arc ``u->v`` from an over-full vertex toward a
    vertex with smaller outdegree, so the degree sequence moves toward the
    feasible window.
    """
    hi = n - 1 - d
    for _ in range(steps):
        deg = [m.bit_count() for m in out]
        bad = [v for v in range(n) if deg[v] < d or deg[v] > hi]
        if not bad:
            return True
        v = rng.choice(bad)
        if deg[v] > hi:
            cands = [w for w in bits(out[v]) if deg[w] < deg[v] - 1]
            if not cands:
                continue
            low = min(deg[w] for w in cands)
            w = rng.choice([w for w in cands if deg[w] == low])
            out[v] &= ~(1 << w)
            out[w] |= 1 << v
        else:
            cands = [w for w in range(n) if out[w] >> v & 1 and deg[w] > deg[v] + 1]
            if not cands:
                continue
            top = max(deg[w] for w in cands)
            w = rng.choice([w for w in cands if deg[w] == top])
            out[w] &= ~(1 << v)
            out[v] |= 1 << w
    return all(d <= m.bit_count() <= hi for m in out)


def random_with_min_semidegree(
    n: int,
    d: int,
    seed: int = 0,
    max_tries: int = 100,
    drop: float = 0.0,
) -> OrientedGraph:
    """Sample a dense oriented graph with ``min_semidegree >= d``.

    Each try draws a random tournament and applies a bounded arc-reversal
    repair toward the degree window ``[d, n-1-d]``; a try is accepted once
    the window holds.  With ``drop > 0`` each arc is then offered for
    deletion with that probability, kept whenever deleting it would push an
    endpoint below ``d``.
    """
    if d < 0:
        raise ValueError("d must be non-negative")
    rng = random.Random(seed)
    for _ in range(max_tries):
        if 2 * d > n - 1:
            break
        out = [0] * n
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < 0.5:
                    out[u] |= 1 << v
                else:
                    out[v] |= 1 << u
        if d == 0 or _repair_tournament(out, n, d, rng, steps=4 * n * n):
            g = OrientedGraph.from_masks(out)
            if drop > 0:
                _thin(g, d, drop, rng)
            if g.n == 0 or g.min_semidegree() >= d:
                return g
    raise Exhausted(f"no oriented graph with n={n}, min semidegree >= {d} after {max_tries} tries")


def _thin(g: OrientedGraph, d: int, drop: float, rng: random.Random) -> None:
    arcs = g.arcs()
    rng.shuffle(arcs)
    for u, v in arcs:
        if rng.random() >= drop:
            continue
        if g.out_degree(u) > d and g.in_degree(v) > d:
            g.remove_arc(u, v)


def perturb(g: OrientedGraph, per_vertex_budget: int, seed: int = 0) -> OrientedGraph:
    """Delete arcs so that no vertex loses more than ``per_vertex_budget`` of them.

    Arcs are scanned in seeded random order and removed while both
    endpoints still have budget, so the deletion set is maximal.
    """
    if per_vertex_budget < 0:
        raise ValueError("budget must be non-negative")
    h = g.copy()
    if per_vertex_budget == 0:
        return h
    rng = random.Random(seed)
    arcs = g.arcs()
    rng.shuffle(arcs)
    lost = [0] * g.n
    for u, v in arcs:
        if lost[u] < per_vertex_budget and lost[v] < per_vertex_budget:
            h.remove_arc(u, v)
            lost[u] += 1
            lost[v] += 1
    return h


def max_deleted_degree(original: OrientedGraph, perturbed: OrientedGraph) -> int:
    """Delta(original - perturbed), the largest number of arcs any vertex lost."""
    worst = 0
    for v in range(original.n):
        lost = original.nbr_mask(v) & ~perturbed.nbr_mask(v)
        worst = max(worst, lost.bit_count())
    return worst


def semidegree_threshold(n: int) -> int:
    """ceil(7n/18), the smallest integer semidegree meeting the tiling threshold."""
    return math.ceil(7 * n / 18)

"""Near-tilings, links and absorbers for graphs far from the extremal structure.

The pipeline in :func:`nonextremal_tile` reserves a set of disjoint
18-vertex absorbers, near-tiles the rest by lexicographic local search,
and finally swallows the leftover triples into the absorbers.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field

from .exact import (
    SolveBudget,
    SolveOutcome,
    StageFailed,
    Status,
    UNLIMITED,
    find_perfect_tiling,
    greedy_tiling,
)
from .graph import (
    OrientedGraph,
    Tiling,
    TransitiveTriangle,
    bits,
    mask_of,
    transitive_triangle_on,
    validate_tiling,
)
from .matching import bipartite_matching, max_matching

log = logging.getLogger(__name__)


def tt_partners(g: OrientedGraph, a: int, b: int) -> int:
    """Bitset of ``w`` such that ``{a, b, w}`` induces a transitive triangle."""
    if not g.adjacent(a, b):
        return 0
    if not g.has_arc(a, b):
        a, b = b, a
    common = g.nbr_mask(a) & g.nbr_mask(b)
    return common & ~(g.out_mask(b) & g.in_mask(a))


def directed_path_on(g: OrientedGraph, a: int, b: int, c: int) -> tuple[int, int, int] | None:
    """An ordering ``(u, v, w)`` of the three vertices with arcs ``u->v->w``, if any."""
    for u, v, w in ((a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)):
        if g.has_arc(u, v) and g.has_arc(v, w):
            return (u, v, w)
    return None


# -- lexicographic near-tiling ----------------------------------------------------

_T, _P, _F, _I = "T", "P", "F", "I"
_GAIN = {_T: (1, 0, 0), _P: (0, 1, 0), _F: (0, 0, 1), _I: (0, 0, 0)}


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@dataclass
class PartialCover:
    """Vertex-disjoint transitive triangles, 3-vertex directed paths, arcs and singletons."""

    T: list[TransitiveTriangle] = field(default_factory=list)
    P: list[tuple[int, int, int]] = field(default_factory=list)
    F: list[tuple[int, int]] = field(default_factory=list)
    I: list[int] = field(default_factory=list)
    budget_exhausted: bool = False
    moves: list[tuple[str, tuple, tuple]] = field(default_factory=list)
    seed: int | None = None

    @property
    def potential(self) -> tuple[int, int, int]:
        return (len(self.T), len(self.P), len(self.F))

    @property
    def X(self) -> set[int]:
        return {v for t in self.T for v in t}

    @property
    def Y(self) -> set[int]:
        return {v for p in self.P for v in p}

    @property
    def Z(self) -> set[int]:
        return {v for e in self.F for v in e} | set(self.I)

    def leftover(self) -> int:
        """Vertices not covered by the triangles."""
        return len(self.Y) + len(self.Z)

    def tiling(self) -> Tiling:
        return Tiling(list(self.T))

    def validate(self, g: OrientedGraph) -> None:
        seen: set[int] = set()
        pieces = [*self.T, *self.P, *self.F, *((v,) for v in self.I)]
        for piece in pieces:
            for v in piece:
                if v in seen:
                    raise AssertionError(f"vertex {v} covered twice")
                seen.add(v)
        if seen != set(range(g.n)):
            raise AssertionError("pieces do not cover V(G)")
        for t in self.T:
            if not t.is_in(g):
                raise AssertionError(f"{t} is not a transitive triangle")
        for u, v, w in self.P:
            if not (g.has_arc(u, v) and g.has_arc(v, w)):
                raise AssertionError(f"{(u, v, w)} is not a directed path")
        for u, v in self.F:
            if not g.has_arc(u, v):
                raise AssertionError(f"{(u, v)} is not an arc")

    def to_json(self) -> dict:
        return {
            "T": [list(t) for t in self.T],
            "P": [list(p) for p in self.P],
            "F": [list(e) for e in self.F],
            "I": list(self.I),
            "potential": list(self.potential),
            "leftover": self.leftover(),
            "budget_exhausted": self.budget_exhausted,
            "accepted_moves": len(self.moves),
            "seed": self.seed,
        }


def _classify_triple(g: OrientedGraph, a: int, b: int, c: int):
    tt = transitive_triangle_on(g, a, b, c)
    if tt is not None:
        return _T, tt
    path = directed_path_on(g, a, b, c)
    if path is not None:
        return _P, path
    return None


def best_cover(g: OrientedGraph, vertices: list[int]):
    """Lexicographically best (|T|, |P|, |F|) decomposition of a small vertex set.

    Returns ``(potential, pieces)`` where each piece is ``(kind, payload)``.
    Exponential in ``len(vertices)``; callers keep it below ten.
    """
    k = len(vertices)
    memo: dict[int, tuple] = {0: ((0, 0, 0), ())}

    def best(mask: int):
        hit = memo.get(mask)
        if hit is not None:
            return hit
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        vi = vertices[i]
        pot, pieces = best(rest)
        result = (pot, pieces + ((_I, vi),))
        rl = list(bits(rest))
        for x, j in enumerate(rl):
            vj = vertices[j]
            if g.adjacent(vi, vj):
                p2, pc2 = best(rest & ~(1 << j))
                arc = (vi, vj) if g.has_arc(vi, vj) else (vj, vi)
                cand = (_add(p2, _GAIN[_F]), pc2 + ((_F, arc),))
                if cand[0] > result[0]:
                    result = cand
            for l in rl[x + 1:]:
                vl = vertices[l]
                cls = _classify_triple(g, vi, vj, vl)
                if cls is None:
                    continue
                p3, pc3 = best(rest & ~(1 << j) & ~(1 << l))
                cand = (_add(p3, _GAIN[cls[0]]), pc3 + (cls,))
                if cand[0] > result[0]:
                    result = cand
        memo[mask] = result
        return result

    return best((1 << k) - 1)


class _Pieces:
    """Mutable piece store indexed by vertex."""

    def __init__(self, n: int):
        self.kind: dict[int, str] = {}
        self.payload: dict[int, tuple] = {}
        self.mask: dict[int, int] = {}
        self.owner = [-1] * n
        self._next = 0

    def add(self, kind: str, payload) -> int:
        pid = self._next
        self._next += 1
        verts = (payload,) if kind == _I else tuple(payload)
        self.kind[pid] = kind
        self.payload[pid] = payload
        self.mask[pid] = mask_of(verts)
        for v in verts:
            self.owner[v] = pid
        return pid

    def remove(self, pid: int) -> None:
        del self.kind[pid], self.payload[pid], self.mask[pid]

    def vertices(self, pid: int) -> list[int]:
        return list(bits(self.mask[pid]))

    def potential(self) -> tuple[int, int, int]:
        t = p = f = 0
        for k in self.kind.values():
            t += k == _T
            p += k == _P
            f += k == _F
        return (t, p, f)


def _initial_cover(g: OrientedGraph, rng: random.Random) -> _Pieces:
    store = _Pieces(g.n)
    used = 0
    for mask, s, m, t in greedy_tiling(g):
        store.add(_T, TransitiveTriangle(s, m, t))
        used |= mask
    rest = [v for v in range(g.n) if not used >> v & 1]
    rng.shuffle(rest)
    free = set(rest)
    for v in rest:
        if v not in free:
            continue
        for w in bits(g.out_mask(v)):
            if w in free and w != v:
                nxt = [x for x in bits(g.out_mask(w)) if x in free and x != v]
                if nxt:
                    store.add(_P, (v, w, nxt[0]))
                    free -= {v, w, nxt[0]}
                    break
    left = sorted(free)
    index = {v: i for i, v in enumerate(left)}
    edges = [(index[u], index[v]) for u in left for v in bits(g.nbr_mask(u)) if v in index and u < v]
    for a, b in max_matching(len(left), edges):
        u, v = left[a], left[b]
        store.add(_F, (u, v) if g.has_arc(u, v) else (v, u))
        free -= {u, v}
    for v in sorted(free):
        store.add(_I, v)
    return store


def lex_max_tiling(g: OrientedGraph, move_budget: int = 200_000, seed: int = 0) -> PartialCover:
    """Local maximum of (|T|, |P|, |F|) over covers of V(G) by TT3s, paths, arcs and vertices.

    Moves re-cover the union of a deficient piece (path, arc or singleton)
    with one adjacent piece, or with an adjacent piece plus a second
    deficient piece, and are accepted only on strict lexicographic gain.
    ``move_budget`` caps the number of unions examined; when it runs out
    the best cover so far is returned with ``budget_exhausted`` set.
    """
    rng = random.Random(seed)
    store = _initial_cover(g, rng)
    cache: dict[int, tuple] = {}
    examined = 0
    moves: list[tuple[str, tuple, tuple]] = []
    exhausted = False

    def nbr_of(mask: int) -> int:
        m = 0
        for v in bits(mask):
            m |= g.nbr_mask(v)
        return m & ~mask

    def pieces_touching(mask: int) -> list[int]:
        return sorted({store.owner[v] for v in bits(nbr_of(mask))})

    def try_union(pids: tuple[int, ...]) -> bool:
        nonlocal examined
        examined += 1
        union = 0
        current = (0, 0, 0)
        for pid in pids:
            union |= store.mask[pid]
            current = _add(current, _GAIN[store.kind[pid]])
        hit = cache.get(union)
        if hit is None:
            hit = best_cover(g, list(bits(union)))
            cache[union] = hit
        pot, pieces = hit
        if pot <= current:
            return False
        before = store.potential()
        for pid in pids:
            store.remove(pid)
        for kind, payload in pieces:
            store.add(kind, payload)
        after = store.potential()
        if len(pids) == 3:
            label = "m4"
        else:
            label = "m1" if after[0] > before[0] else "m2" if after[1] > before[1] else "m3"
        moves.append((label, before, after))
        return True

    improved = True
    while improved and not exhausted:
        improved = False
        deficient = [pid for pid, k in sorted(store.kind.items()) if k != _T]
        for a in deficient:
            if a not in store.kind:
                continue
            for b in pieces_touching(store.mask[a]):
                if examined >= move_budget:
                    exhausted = True
                    break
                if b == a or b not in store.kind or a not in store.kind:
                    continue
                if try_union((a, b)):
                    improved = True
                    break
            if exhausted:
                break
        if improved or exhausted:
            continue
        deficient = [pid for pid, k in sorted(store.kind.items()) if k != _T]
        dset = set(deficient)
        for a in deficient:
            if a not in store.kind:
                continue
            for b in pieces_touching(store.mask[a]):
                if b == a or b not in store.kind:
                    continue
                for c in pieces_touching(store.mask[a] | store.mask[b]):
                    if c in (a, b) or c not in dset or c not in store.kind:
                        continue
                    if examined >= move_budget:
                        exhausted = True
                        break
                    if try_union((a, b, c)):
                        improved = True
                        break
                if improved or exhausted:
                    break
            if improved or exhausted:
                break

    pc = PartialCover(budget_exhausted=exhausted, moves=moves, seed=seed)
    for pid in sorted(store.kind):
        kind, payload = store.kind[pid], store.payload[pid]
        {_T: pc.T, _P: pc.P, _F: pc.F, _I: pc.I}[kind].append(payload)
    pc.T.sort()
    pc.P.sort()
    pc.F.sort()
    pc.I.sort()
    return pc


def cover_structure_bounds(g: OrientedGraph, pc: PartialCover) -> dict:
    """Compare a cover with the bounds |P| <= 2, |F| <= 1, |I| <= 3.

    The bounds are only claimed for global maxima under the semidegree
    hypothesis; a local maximum exceeding them is flagged, never asserted.
    """
    hyp = g.n > 0 and 18 * g.min_semidegree() >= 7 * g.n
    exceeded = []
    if len(pc.P) > 2:
        exceeded.append("P")
    if len(pc.F) > 1:
        exceeded.append("F")
    if len(pc.I) > 3:
        exceeded.append("I")
    return {
        "P": len(pc.P),
        "F": len(pc.F),
        "I": len(pc.I),
        "leftover": pc.leftover(),
        "hypothesis_holds": hyp,
        "exceeded": exceeded,
        "flagged": bool(exceeded),
        "violates_under_hypothesis": hyp and bool(exceeded),
    }


# -- quadrants and links ---------------------------------------------------------


@dataclass
class QuadrantReport:
    x: int
    y: int
    n11: frozenset[int]  # N+(x) ∩ N+(y)
    n12: frozenset[int]  # N+(x) ∩ N-(y)
    n21: frozenset[int]  # N-(x) ∩ N+(y)
    n22: frozenset[int]  # N-(x) ∩ N-(y)
    F: list[tuple[int, int]]

    @property
    def common(self) -> frozenset[int]:
        return self.n11 | self.n12 | self.n21 | self.n22

    def to_json(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "N11": sorted(self.n11),
            "N12": sorted(self.n12),
            "N21": sorted(self.n21),
            "N22": sorted(self.n22),
            "F": [list(e) for e in self.F],
        }


def link_quadrants(g: OrientedGraph, x: int, y: int) -> QuadrantReport:
    """Split N(x) ∩ N(y) by arc direction and collect the arc set F(x, y).

    F(x, y) holds arcs from N22 into N(x, y), arcs from N(x, y) into N11,
    and arcs inside any single quadrant; each yields transitive triangles
    with both x and y.
    """
    if x == y:
        raise ValueError("quadrants need x != y")
    ox, ix, oy, iy = g.out_mask(x), g.in_mask(x), g.out_mask(y), g.in_mask(y)
    q11, q12, q21, q22 = ox & oy, ox & iy, ix & oy, ix & iy
    common = q11 | q12 | q21 | q22
    arcs = set()
    for u in bits(q22):
        for v in bits(g.out_mask(u) & common):
            arcs.add((u, v))
    for u in bits(common):
        for v in bits(g.out_mask(u) & q11):
            arcs.add((u, v))
    for q in (q11, q12, q21, q22):
        for u in bits(q):
            for v in bits(g.out_mask(u) & q):
                arcs.add((u, v))
    fz = lambda m: frozenset(bits(m))  # noqa: E731
    return QuadrantReport(x, y, fz(q11), fz(q12), fz(q21), fz(q22), sorted(arcs))


@dataclass
class LinkWitness:
    """Vertices ``v_1 = x, ..., v_{3p+1} = y`` with tilings of both ends.

    ``tail`` tiles positions 2..3p+1 and ``head`` tiles positions 1..3p.
    """

    p: int
    sequence: tuple[int, ...]
    tail: Tiling
    head: Tiling

    def validate(self, g: OrientedGraph) -> bool:
        seq = self.sequence
        if len(seq) != 3 * self.p + 1 or len(set(seq)) != len(seq):
            return False
        if self.p == 0:
            return True
        t = validate_tiling(g, self.tail, within=seq[1:])
        h = validate_tiling(g, self.head, within=seq[:-1])
        return t.valid and t.perfect and h.valid and h.perfect

    def to_json(self) -> dict:
        return {"p": self.p, "sequence": list(self.sequence), "tail": self.tail.as_lists(), "head": self.head.as_lists()}


def _tt(g: OrientedGraph, a: int, b: int, c: int) -> TransitiveTriangle:
    t = transitive_triangle_on(g, a, b, c)
    assert t is not None, (a, b, c)
    return t


def _one_link_pair(g: OrientedGraph, x: int, y: int, avoid: int, rng: random.Random | None) -> tuple[int, int] | None:
    blocked = avoid | (1 << x) | (1 << y)
    firsts = list(bits(g.nbr_mask(x) & g.nbr_mask(y) & ~blocked))
    if rng is not None:
        rng.shuffle(firsts)
    for s in firsts:
        seconds = tt_partners(g, x, s) & tt_partners(g, y, s) & ~blocked
        if seconds:
            if rng is None:
                t = (seconds & -seconds).bit_length() - 1
            else:
                t = rng.choice(list(bits(seconds)))
            return s, t
    return None


def _disjoint_triangle(g: OrientedGraph, blocked: int, rng: random.Random | None, tries: int = 200):
    free = list(bits(g.vertex_mask() & ~blocked))
    if rng is None:
        for a in free:
            for b in bits(g.out_mask(a) & ~blocked):
                rest = tt_partners(g, a, b) & ~blocked
                if rest:
                    c = (rest & -rest).bit_length() - 1
                    return _tt(g, a, b, c)
        return None
    for _ in range(tries):
        if not free:
            return None
        a = rng.choice(free)
        outs = list(bits(g.out_mask(a) & ~blocked))
        if not outs:
            continue
        b = rng.choice(outs)
        rest = list(bits(tt_partners(g, a, b) & ~blocked))
        if rest:
            return _tt(g, a, b, rng.choice(rest))
    return _disjoint_triangle(g, blocked, None)


def find_link(
    g: OrientedGraph,
    x: int,
    y: int,
    p: int = 2,
    budget: SolveBudget | None = None,
    avoid: int = 0,
    rng: random.Random | None = None,
) -> LinkWitness | None:
    """Search for an injective p-link witness between x and y (p in {1, 2}).

    For p = 2 a 1-link extended by a disjoint transitive triangle is tried
    first; otherwise the search looks for ``c`` with ``xac`` and ``ybc``
    transitive and ``a``, ``b`` themselves 1-linked.  Vertices in the
    bitset ``avoid`` are never used.  Returns None when nothing is found.
    """
    if x == y:
        return LinkWitness(0, (x,), Tiling(), Tiling())
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    deadline = None
    if budget is not None and budget.time_ms is not None:
        deadline = time.perf_counter() + budget.time_ms / 1000
    pair = _one_link_pair(g, x, y, avoid, rng)
    if p == 1:
        if pair is None:
            return None
        s, t = pair
        return LinkWitness(1, (x, s, t, y), Tiling([_tt(g, s, t, y)]), Tiling([_tt(g, x, s, t)]))
    if pair is not None:
        s, t = pair
        blocked = avoid | mask_of((x, y, s, t))
        extra = _disjoint_triangle(g, blocked, rng)
        if extra is not None:
            a, b, c = extra
            seq = (x, s, t, a, b, c, y)
            return LinkWitness(2, seq, Tiling([_tt(g, s, t, y), extra]), Tiling([_tt(g, x, s, t), extra]))
    blocked = avoid | (1 << x) | (1 << y)
    cs = list(bits(g.nbr_mask(x) & g.nbr_mask(y) & ~blocked))
    if rng is not None:
        rng.shuffle(cs)
    steps = 0
    node_limit = budget.node_limit if budget is not None else None
    for c in cs:
        As = list(bits(tt_partners(g, x, c) & ~blocked))
        Bs = list(bits(tt_partners(g, y, c) & ~blocked))
        if rng is not None:
            rng.shuffle(As)
            rng.shuffle(Bs)
        for a in As:
            for b in Bs:
                if a == b:
                    continue
                steps += 1
                if node_limit is not None and steps > node_limit:
                    return None
                if deadline is not None and steps & 255 == 0 and time.perf_counter() > deadline:
                    return None
                inner = _one_link_pair(g, a, b, blocked | mask_of((c, a, b)), rng)
                if inner is None:
                    continue
                s, t = inner
                seq = (x, a, c, s, t, b, y)
                tail = Tiling([_tt(g, a, s, t), _tt(g, y, b, c)])
                head = Tiling([_tt(g, x, a, c), _tt(g, s, t, b)])
                return LinkWitness(2, seq, tail, head)
    return None


def count_one_links(g: OrientedGraph, x: int, y: int) -> int:
    """Number of ordered injective 1-link witnesses ``(s, t)`` between x and y."""
    blocked = (1 << x) | (1 << y)
    total = 0
    for s in bits(g.nbr_mask(x) & g.nbr_mask(y) & ~blocked):
        total += (tt_partners(g, x, s) & tt_partners(g, y, s) & ~blocked).bit_count()
    return total


# -- absorbing sets -------------------------------------------------------------------


@dataclass
class AbsorbingSet:
    """18 vertices U, disjoint from X, with perfect tilings of G[U] and G[U ∪ X]."""

    X: tuple[int, int, int]
    U: tuple[int, ...]
    tiling_U: Tiling
    tiling_UX: Tiling
    route: str = "links"

    def validate(self, g: OrientedGraph) -> bool:
        if len(self.U) != 18 or len(set(self.U)) != 18 or set(self.U) & set(self.X):
            return False
        a = validate_tiling(g, self.tiling_U, within=self.U)
        b = validate_tiling(g, self.tiling_UX, within=self.U + self.X)
        return a.valid and a.perfect and b.valid and b.perfect

    def to_json(self) -> dict:
        return {
            "X": list(self.X),
            "U": list(self.U),
            "tiling_U": self.tiling_U.as_lists(),
            "tiling_UX": self.tiling_UX.as_lists(),
            "route": self.route,
        }


def _in_some_triangle(g: OrientedGraph, v: int) -> bool:
    return any(tt_partners(g, v, w) for w in bits(g.nbr_mask(v)))


def _random_triangle(g: OrientedGraph, blocked: int, rng: random.Random):
    return _disjoint_triangle(g, blocked, rng, tries=50)


def find_absorbing_set(
    g: OrientedGraph,
    X: tuple[int, int, int],
    budget: SolveBudget | None = None,
    seed: int | random.Random = 0,
    avoid: int = 0,
    attempts: int = 60,
) -> AbsorbingSet | None:
    """Randomised search for an 18-vertex absorber of the ordered triple X.

    Composes a transitive triangle ``f`` with three 2-links ``f(i) ~ x_i``:
    the first six vertices of every link tile U, while ``f`` plus the last
    six vertices of every link tile U ∪ X.  If the gadget route fails, a
    few 18-sets drawn from the common neighbourhood of X are checked with
    the exact solver.  Vertices in ``avoid`` are never used.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    X = tuple(X)
    if len(set(X)) != 3:
        raise ValueError("X must consist of three distinct vertices")
    if not all(_in_some_triangle(g, x) for x in X):
        return None
    deadline = None
    if budget is not None and budget.time_ms is not None:
        deadline = time.perf_counter() + budget.time_ms / 1000
    xmask = mask_of(X)
    for _ in range(attempts):
        if deadline is not None and time.perf_counter() > deadline:
            return None
        f = _random_triangle(g, avoid | xmask, rng)
        if f is None:
            break
        used = avoid | xmask | f.mask
        links = []
        for fi, xi in zip(f, X):
            link = find_link(g, fi, xi, 2, SolveBudget(node_limit=2000), used & ~mask_of((fi, xi)), rng)
            if link is None:
                break
            links.append(link)
            used |= mask_of(link.sequence)
        if len(links) < 3:
            continue
        U = tuple(sorted(v for link in links for v in link.sequence[:-1]))
        tiling_U = Tiling([t for link in links for t in link.head])
        tiling_UX = Tiling([f] + [t for link in links for t in link.tail])
        found = AbsorbingSet(X, U, tiling_U, tiling_UX, "links")
        if found.validate(g):
            return found
    return _sampled_absorber(g, X, avoid, rng, deadline)


def _sampled_absorber(g, X, avoid, rng, deadline, tries: int = 5) -> AbsorbingSet | None:
    pool = list(bits(g.vertex_mask() & ~avoid & ~mask_of(X)))
    if len(pool) < 18:
        return None
    for _ in range(tries):
        if deadline is not None and time.perf_counter() > deadline:
            return None
        U = tuple(sorted(rng.sample(pool, 18)))
        sub, old = g.induced(U)
        a = find_perfect_tiling(sub, SolveBudget(node_limit=20_000))
        if a.status is not Status.TILING:
            continue
        sub2, old2 = g.induced(U + tuple(X))
        b = find_perfect_tiling(sub2, SolveBudget(node_limit=20_000))
        if b.status is not Status.TILING:
            continue
        return AbsorbingSet(tuple(X), U, a.tiling.relabel(old), b.tiling.relabel(old2), "sampled")
    return None


class CoverageFailed(RuntimeError):
    def __init__(self, triple, count: int, required: int):
        self.triple = triple
        self.count = count
        self.required = required
        super().__init__(f"triple {triple} has {count} absorbers, {required} required")


@dataclass
class Absorber:
    """Disjoint absorbing sets whose union U can swallow small leftover sets."""

    U: tuple[int, ...]
    sets: list[AbsorbingSet]
    registry: dict[tuple[int, int, int], list[AbsorbingSet]]
    seed: int
    sigma: float
    required: int = 0
    report: dict = field(default_factory=dict)

    def _absorbs(self, g, j, triple, budget, cache):
        key = (j, frozenset(triple))
        if key not in cache:
            base = self.sets[j]
            sub, old = g.induced(base.U + tuple(triple))
            res = find_perfect_tiling(sub, budget)
            cache[key] = res.tiling.relabel(old) if res.status is Status.TILING else None
        return cache[key]

    def absorb(
        self, g: OrientedGraph, W: list[int], seed: int = 0, budget: SolveBudget = SolveBudget(node_limit=50_000),
        orderings: int = 20,
    ) -> tuple[Tiling, str]:
        """Perfect tiling of G[U ∪ W] for |W| divisible by three.

        Triples of W are matched to distinct absorbing sets; if no ordering
        of W admits such a matching, G[U ∪ W] is handed to the exact solver.
        """
        if len(W) % 3:
            raise ValueError("|W| must be divisible by 3")
        rng = random.Random(seed)
        cache: dict = {}
        k = len(W) // 3
        if k <= len(self.sets):
            for _ in range(orderings if k else 1):
                order = list(W)
                rng.shuffle(order)
                triples = [tuple(order[3 * i: 3 * i + 3]) for i in range(k)]
                adj = {
                    i: [j for j in range(len(self.sets)) if self._absorbs(g, j, t, budget, cache) is not None]
                    for i, t in enumerate(triples)
                }
                pairs = bipartite_matching(list(range(k)), adj)
                if len(pairs) < k:
                    continue
                tiles = []
                used = set(pairs.values())
                for i, j in pairs.items():
                    tiles.extend(self._absorbs(g, j, triples[i], budget, cache))
                for j, s in enumerate(self.sets):
                    if j not in used:
                        tiles.extend(s.tiling_U)
                return Tiling(tiles), "registry"
        sub, old = g.induced(tuple(self.U) + tuple(W))
        res = find_perfect_tiling(sub, budget)
        if res.status is Status.TILING:
            return res.tiling.relabel(old), "exact"
        raise StageFailed("absorb", f"no perfect tiling of G[U ∪ W] found ({res.status.value})")

    def to_json(self) -> dict:
        return {
            "U": list(self.U),
            "sets": [s.to_json() for s in self.sets],
            "seed": self.seed,
            "sigma": self.sigma,
            "required": self.required,
            "report": self.report,
        }


def build_absorber(
    g: OrientedGraph,
    sigma: float,
    seed: int = 0,
    reserve_count: int = 3,
    test_triples: int = 100,
    budget: SolveBudget = SolveBudget(node_limit=50_000),
) -> Absorber:
    """Reserve ``floor(3*sigma*n / 18)`` disjoint absorbing sets.

    Coverage is then measured on ``test_triples`` random triples outside U:
    a triple counts an absorbing set when G[U_j ∪ X] has a perfect tiling.
    Every test triple must reach ``min(reserve_count, #sets)`` absorbers,
    otherwise :class:`CoverageFailed` names the weakest one.
    """
    rng = random.Random(seed)
    n = g.n
    k = int(3 * sigma * n + 1e-9) // 18
    sets: list[AbsorbingSet] = []
    used = 0
    failures = 0
    while len(sets) < k and failures < 3 * k + 3:
        free = list(bits(g.vertex_mask() & ~used))
        if len(free) < 21:
            break
        X = tuple(rng.sample(free, 3))
        found = find_absorbing_set(g, X, SolveBudget(time_ms=5000), rng, avoid=used)
        if found is None:
            failures += 1
            continue
        sets.append(found)
        used |= mask_of(found.U)
    U = tuple(sorted(v for s in sets for v in s.U))
    required = min(reserve_count, len(sets))
    absorber = Absorber(U, sets, {}, seed, sigma, required)
    outside = [v for v in range(n) if not used >> v & 1]
    cache: dict = {}
    weakest = None
    if sets and len(outside) >= 3:
        for _ in range(test_triples):
            X = tuple(sorted(rng.sample(outside, 3)))
            hits = []
            for j, s in enumerate(sets):
                til = absorber._absorbs(g, j, X, budget, cache)
                if til is not None:
                    hits.append(AbsorbingSet(X, s.U, s.tiling_U, til, "registry"))
            absorber.registry[X] = hits
            if weakest is None or len(hits) < weakest[1]:
                weakest = (X, len(hits))
    absorber.report = {
        "sets": len(sets),
        "target_sets": k,
        "U_size": len(U),
        "tested_triples": len(absorber.registry),
        "min_absorbers": weakest[1] if weakest else None,
        "required": required,
    }
    if weakest is not None and weakest[1] < required:
        raise CoverageFailed(weakest[0], weakest[1], required)
    return absorber


def nonextremal_tile(
    g: OrientedGraph,
    seed: int = 0,
    budget: SolveBudget = SolveBudget(time_ms=120_000),
    sigma: float = 0.15,
    reserve_count: int = 3,
    test_triples: int = 20,
) -> SolveOutcome:
    """Absorber, then near-tiling of G - U, then absorption of the leftover.

    Raises :class:`StageFailed` naming the stage ("absorber", "near_tiling"
    or "absorb") that could not be completed.  Every returned tiling has
    been validated as perfect.
    """
    start = time.perf_counter()
    n = g.n
    if n % 3:
        raise StageFailed("input", f"n={n} is not divisible by 3")
    trace: list[dict] = []
    try:
        absorber = build_absorber(g, sigma, seed, reserve_count, test_triples)
    except CoverageFailed as exc:
        raise StageFailed("absorber", str(exc), trace) from exc
    trace.append({"stage": "absorber", **absorber.report})
    rest = [v for v in range(n) if v not in set(absorber.U)]
    sub, old = g.induced(rest)
    pc = lex_max_tiling(sub, seed=seed)
    near = pc.tiling().relabel(old)
    covered = near.covered
    W = [v for v in rest if v not in covered]
    trace.append({"stage": "near_tiling", "tiles": len(near), "leftover": len(W), "potential": list(pc.potential)})
    remaining_ms = None
    if budget.time_ms is not None:
        remaining_ms = max(1, int(budget.time_ms - (time.perf_counter() - start) * 1000))
    inner = SolveBudget(node_limit=budget.node_limit or 200_000, time_ms=remaining_ms)
    try:
        absorbed, route = absorber.absorb(g, W, seed, inner)
    except StageFailed as exc:
        raise StageFailed("absorb", exc.diagnostic, trace) from exc
    trace.append({"stage": "absorb", "route": route, "leftover": len(W)})
    tiling = near + absorbed
    check = validate_tiling(g, tiling)
    if not (check.valid and check.perfect):
        raise StageFailed("validate", check.error or "tiling not perfect", trace)
    return SolveOutcome(
        Status.TILING,
        tiling,
        elapsed_ms=(time.perf_counter() - start) * 1000,
        certificate="nonextremal_pipeline",
        stats={"trace": trace, "seed": seed},
    )

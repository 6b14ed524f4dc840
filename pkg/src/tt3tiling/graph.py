"""Oriented graphs, transitive triangles and tilings.

Vertices are the integers ``0..n-1``.  Neighbourhoods are kept as integer
bitsets so that intersections (the workhorse of every triangle query) are a
single ``&``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence


class GraphError(ValueError):
    """Base class for malformed graph input."""


class LoopRejected(GraphError):
    pass


class OrientationConflict(GraphError):
    pass


class DuplicateArc(GraphError):
    pass


class BadVertex(GraphError):
    pass


class GraphFormatError(GraphError):
    pass


def bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def as_mask(vertices: int | Iterable[int]) -> int:
    if isinstance(vertices, int):
        return vertices
    return mask_of(vertices)


class OrientedGraph:
    """A loopless digraph with at most one arc between any two vertices.

    Build it with :meth:`add_arc` (or pass ``arcs``), then treat it as
    read-only; none of the algorithms in this package mutate their input.
    """

    __slots__ = ("n", "_out", "_in")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise BadVertex(f"vertex count must be non-negative, got {n}")
        self.n = n
        self._out = [0] * n
        self._in = [0] * n
        for u, v in arcs:
            self.add_arc(u, v)

    # -- construction -----------------------------------------------------

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise BadVertex(f"vertex {v} outside 0..{self.n - 1}")

    def add_arc(self, u: int, v: int) -> OrientedGraph:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise LoopRejected(f"loop at vertex {u}")
        if self._out[v] >> u & 1:
            raise OrientationConflict(f"arc {v}->{u} already present")
        if self._out[u] >> v & 1:
            raise DuplicateArc(f"arc {u}->{v} already present")
        self._out[u] |= 1 << v
        self._in[v] |= 1 << u
        return self

    def remove_arc(self, u: int, v: int) -> OrientedGraph:
        if not self.has_arc(u, v):
            raise GraphError(f"arc {u}->{v} not present")
        self._out[u] &= ~(1 << v)
        self._in[v] &= ~(1 << u)
        return self

    def copy(self) -> OrientedGraph:
        g = OrientedGraph(self.n)
        g._out = list(self._out)
        g._in = list(self._in)
        return g

    @classmethod
    def from_masks(cls, out_masks: Sequence[int]) -> OrientedGraph:
        """Build from out-neighbourhood bitsets (validated)."""
        g = cls(len(out_masks))
        for u, m in enumerate(out_masks):
            for v in bits(m):
                g.add_arc(u, v)
        return g

    # -- queries -------------------------------------------------------------

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self._out[u] >> v & 1)

    def adjacent(self, u: int, v: int) -> bool:
        return bool((self._out[u] | self._in[u]) >> v & 1)

    def out_mask(self, v: int) -> int:
        return self._out[v]

    def in_mask(self, v: int) -> int:
        return self._in[v]

    def nbr_mask(self, v: int) -> int:
        return self._out[v] | self._in[v]

    def out_neighbors(self, v: int) -> list[int]:
        return list(bits(self._out[v]))

    def in_neighbors(self, v: int) -> list[int]:
        return list(bits(self._in[v]))

    def neighbors(self, v: int) -> list[int]:
        return list(bits(self.nbr_mask(v)))

    def out_degree(self, v: int, within: int | Iterable[int] | None = None) -> int:
        m = self._out[v]
        if within is not None:
            m &= as_mask(within)
        return m.bit_count()

    def in_degree(self, v: int, within: int | Iterable[int] | None = None) -> int:
        m = self._in[v]
        if within is not None:
            m &= as_mask(within)
        return m.bit_count()

    def degree(self, v: int, within: int | Iterable[int] | None = None) -> int:
        m = self.nbr_mask(v)
        if within is not None:
            m &= as_mask(within)
        return m.bit_count()

    def arcs(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in bits(self._out[u])]

    def arcs_between(self, a: int | Iterable[int], b: int | Iterable[int]) -> list[tuple[int, int]]:
        """Arcs directed from ``a`` into ``b``."""
        am, bm = as_mask(a), as_mask(b)
        return [(u, v) for u in bits(am) for v in bits(self._out[u] & bm)]

    def num_arcs(self) -> int:
        return sum(m.bit_count() for m in self._out)

    def vertex_mask(self) -> int:
        return (1 << self.n) - 1

    def min_out_degree(self) -> int:
        return min(m.bit_count() for m in self._out)

    def min_in_degree(self) -> int:
        return min(m.bit_count() for m in self._in)

    def min_semidegree(self) -> int:
        if self.n < 1:
            raise BadVertex("min_semidegree needs at least one vertex")
        return min(self.min_out_degree(), self.min_in_degree())

    def min_degree(self) -> int:
        return min(self.nbr_mask(v).bit_count() for v in range(self.n))

    def max_degree(self) -> int:
        return max(self.nbr_mask(v).bit_count() for v in range(self.n))

    def is_tournament(self) -> bool:
        full = self.vertex_mask()
        return all(self.nbr_mask(v) | (1 << v) == full for v in range(self.n))

    def induced(self, vertices: Iterable[int]) -> tuple[OrientedGraph, list[int]]:
        """Induced subgraph ``G[S]``.

        Returns the subgraph on ``0..|S|-1`` and the list mapping each new
        id back to the original vertex (sorted ascending).
        """
        old = sorted(set(vertices))
        for v in old:
            self._check_vertex(v)
        new_of = {v: i for i, v in enumerate(old)}
        sub = OrientedGraph(len(old))
        smask = mask_of(old)
        for v in old:
            i = new_of[v]
            for w in bits(self._out[v] & smask):
                j = new_of[w]
                sub._out[i] |= 1 << j
                sub._in[j] |= 1 << i
        return sub, old

    def reversed(self) -> OrientedGraph:
        g = OrientedGraph(self.n)
        g._out = list(self._in)
        g._in = list(self._out)
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OrientedGraph):
            return NotImplemented
        return self.n == other.n and self._out == other._out

    def __hash__(self) -> int:
        return hash((self.n, tuple(self._out)))

    def __repr__(self) -> str:
        return f"OrientedGraph(n={self.n}, arcs={self.num_arcs()})"

    # -- text format ---------------------------------------------------------

    def to_text(self, comment: str | None = None) -> str:
        lines = []
        if comment:
            lines.extend(f"# {c}" for c in comment.splitlines())
        lines.append(f"n {self.n}")
        lines.extend(f"{u} {v}" for u, v in self.arcs())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> OrientedGraph:
        g = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if g is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise GraphFormatError(f"line {lineno}: expected 'n <N>', got {raw!r}")
                try:
                    g = cls(int(parts[1]))
                except ValueError as exc:
                    raise GraphFormatError(f"line {lineno}: bad vertex count") from exc
                continue
            if len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: expected '<u> <v>', got {raw!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: non-integer vertex") from exc
            try:
                g.add_arc(u, v)
            except GraphError as exc:
                raise type(exc)(f"line {lineno}: {exc}") from None
        if g is None:
            raise GraphFormatError("missing 'n <N>' header")
        return g

    @classmethod
    def read(cls, path: str | Path) -> OrientedGraph:
        return cls.from_text(Path(path).read_text())

    def write(self, path: str | Path, comment: str | None = None) -> None:
        Path(path).write_text(self.to_text(comment))


def add_arc(g: OrientedGraph, u: int, v: int) -> OrientedGraph:
    return g.add_arc(u, v)


def min_semidegree(g: OrientedGraph) -> int:
    return g.min_semidegree()


def induced(g: OrientedGraph, vertices: Iterable[int]) -> tuple[OrientedGraph, list[int]]:
    return g.induced(vertices)


# -- triangles ----------------------------------------------------------------


class TransitiveTriangle(NamedTuple):
    """A TT3 with its roles: ``source -> middle -> sink`` and ``source -> sink``."""

    source: int
    middle: int
    sink: int

    @property
    def vertices(self) -> tuple[int, int, int]:
        return (self.source, self.middle, self.sink)

    @property
    def mask(self) -> int:
        return (1 << self.source) | (1 << self.middle) | (1 << self.sink)

    def relabel(self, mapping: Sequence[int]) -> TransitiveTriangle:
        return TransitiveTriangle(mapping[self.source], mapping[self.middle], mapping[self.sink])

    def is_in(self, g: OrientedGraph) -> bool:
        s, m, t = self
        return len({s, m, t}) == 3 and g.has_arc(s, m) and g.has_arc(m, t) and g.has_arc(s, t)


def transitive_triangle_on(g: OrientedGraph, a: int, b: int, c: int) -> TransitiveTriangle | None:
    """Return the TT3 on ``{a, b, c}`` with its roles, or None if it is not one."""
    if len({a, b, c}) != 3:
        return None
    trio = (1 << a) | (1 << b) | (1 << c)
    source = middle = sink = -1
    for v in (a, b, c):
        out = (g._out[v] & trio).bit_count()
        inn = (g._in[v] & trio).bit_count()
        if out == 2:
            source = v
        elif inn == 2:
            sink = v
        elif out == 1 and inn == 1:
            middle = v
        else:
            return None
    if min(source, middle, sink) < 0:
        return None
    return TransitiveTriangle(source, middle, sink)


def enumerate_transitive_triangles(g: OrientedGraph) -> list[TransitiveTriangle]:
    """All TT3s, once each, in lexicographic (source, middle, sink) order."""
    out = g._out
    return [
        TransitiveTriangle(s, m, t)
        for s in range(g.n)
        for m in bits(out[s])
        for t in bits(out[s] & out[m])
    ]


def count_transitive_triangles(g: OrientedGraph) -> int:
    out = g._out
    return sum((out[s] & out[m]).bit_count() for s in range(g.n) for m in bits(out[s]))


def enumerate_cyclic_triangles(g: OrientedGraph) -> list[tuple[int, int, int]]:
    """Directed 3-cycles ``(a, b, c)`` with ``a->b->c->a`` and ``a`` the smallest id."""
    out, inn = g._out, g._in
    found = []
    for a in range(g.n):
        above = ~((1 << (a + 1)) - 1)
        for b in bits(out[a] & above):
            for c in bits(out[b] & inn[a] & above):
                found.append((a, b, c))
    return found


def count_cyclic_triangles(g: OrientedGraph) -> int:
    return len(enumerate_cyclic_triangles(g))


def transitive_completions(g: OrientedGraph, u: int, v: int) -> int:
    """Bitset of vertices ``w`` such that ``{u, v, w}`` is a TT3, for an arc ``u -> v``."""
    out, inn = g._out, g._in
    common = (out[u] | inn[u]) & (out[v] | inn[v])
    # w closes a directed 3-cycle iff v -> w -> u
    return common & ~(out[v] & inn[u])


# -- tilings ------------------------------------------------------------------


@dataclass
class Tiling:
    tiles: list[TransitiveTriangle] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self) -> Iterator[TransitiveTriangle]:
        return iter(self.tiles)

    @property
    def covered(self) -> set[int]:
        return {v for t in self.tiles for v in t}

    def relabel(self, mapping: Sequence[int]) -> Tiling:
        return Tiling([t.relabel(mapping) for t in self.tiles])

    def __add__(self, other: Tiling) -> Tiling:
        return Tiling(self.tiles + other.tiles)

    def as_lists(self) -> list[list[int]]:
        return [list(t) for t in self.tiles]


@dataclass(frozen=True)
class TilingCheck:
    valid: bool
    perfect: bool
    error: str | None = None

    def __bool__(self) -> bool:
        return self.valid


def validate_tiling(
    g: OrientedGraph, tiling: Tiling | Iterable[Sequence[int]], within: Iterable[int] | None = None
) -> TilingCheck:
    """Check disjointness and the arc constraints of every tile.

    ``perfect`` means the tiles cover ``within`` (default: all of V(g)) and
    nothing outside it.
    """
    seen: set[int] = set()
    for k, tile in enumerate(tiling):
        if len(tile) != 3:
            return TilingCheck(False, False, f"tile {k} has {len(tile)} vertices")
        s, m, t = tile
        for v in (s, m, t):
            if not (isinstance(v, int) and 0 <= v < g.n):
                return TilingCheck(False, False, f"tile {k}: vertex {v} not in graph")
        if len({s, m, t}) != 3:
            return TilingCheck(False, False, f"tile {k}: repeated vertex in {tuple(tile)}")
        for a, b in ((s, m), (m, t), (s, t)):
            if not g.has_arc(a, b):
                return TilingCheck(False, False, f"tile {k}: missing arc {a}->{b}")
        for v in (s, m, t):
            if v in seen:
                return TilingCheck(False, False, f"tile {k}: vertex {v} already covered")
            seen.add(v)
    target = set(range(g.n)) if within is None else set(within)
    return TilingCheck(True, seen == target)


# -- partitions ----------------------------------------------------------------


@dataclass
class VertexSetPartition:
    """Named, pairwise disjoint vertex blocks (not necessarily covering V)."""

    blocks: dict[str, tuple[int, ...]]

    def __post_init__(self) -> None:
        self.blocks = {k: tuple(v) for k, v in self.blocks.items()}
        seen: dict[int, str] = {}
        for name, block in self.blocks.items():
            for v in block:
                if v in seen:
                    raise ValueError(f"vertex {v} in both {seen[v]!r} and {name!r}")
                seen[v] = name

    def __getitem__(self, name: str) -> tuple[int, ...]:
        return self.blocks[name]

    @property
    def union(self) -> frozenset[int]:
        return frozenset(v for b in self.blocks.values() for v in b)

    def block_of(self, v: int) -> str | None:
        for name, block in self.blocks.items():
            if v in block:
                return name
        return None

    def sizes(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.blocks.items()}

    def to_json(self) -> dict:
        return {"blocks": {k: list(v) for k, v in self.blocks.items()}}

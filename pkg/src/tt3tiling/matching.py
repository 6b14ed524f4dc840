"""Matching primitives used by the extremal pipeline."""

from __future__ import annotations

import random
from collections import deque
from typing import Hashable, Iterable, Mapping, Sequence, TypeVar

L = TypeVar("L", bound=Hashable)
R = TypeVar("R", bound=Hashable)

Matching = list[tuple[int, int]]


class SizeMismatch(ValueError):
    pass


class HallViolation(Exception):
    """No perfect matching; ``subset`` is a set X' with ``|N(X')| < |X'|``."""

    def __init__(self, subset: frozenset, neighborhood: frozenset, partial: dict):
        self.subset = subset
        self.neighborhood = neighborhood
        self.partial = partial
        super().__init__(
            f"Hall's condition fails: |X'|={len(subset)} > |N(X')|={len(neighborhood)}"
        )


def _adjacency(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    return [sorted(a) for a in adj]


def max_matching(n: int, edges: Iterable[tuple[int, int]]) -> Matching:
    """Maximum-cardinality matching of an undirected graph (Edmonds' blossom).

    Starts from a greedy matching and augments along shortest alternating
    paths, contracting odd cycles as they appear.  Returns pairs ``(u, v)``
    with ``u < v`` sorted ascending.
    """
    adj = _adjacency(n, edges)
    match = [-1] * n
    for u in range(n):
        if match[u] == -1:
            for v in adj[u]:
                if match[v] == -1:
                    match[u], match[v] = v, u
                    break

    def augment_from(root: int) -> bool:
        parent = [-1] * n
        base = list(range(n))
        used = [False] * n
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if match[a] == -1:
                    break
                a = parent[match[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[match[b]]

        def mark(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark(v, cur, to, blossom)
                    mark(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        # flip the alternating path ending at the free vertex
                        while to != -1:
                            pv = parent[to]
                            nxt = match[pv]
                            match[to], match[pv] = pv, to
                            to = nxt
                        return True
                    used[match[to]] = True
                    queue.append(match[to])
        return False

    for root in range(n):
        if match[root] == -1:
            augment_from(root)
    return sorted((u, match[u]) for u in range(n) if match[u] > u)


def is_matching(n: int, edges: Iterable[tuple[int, int]], pairs: Iterable[tuple[int, int]]) -> bool:
    edge_set = {frozenset(e) for e in edges}
    seen: set[int] = set()
    for u, v in pairs:
        if u == v or frozenset((u, v)) not in edge_set or u in seen or v in seen:
            return False
        if not (0 <= u < n and 0 <= v < n):
            return False
        seen.update((u, v))
    return True


def bipartite_matching(
    left: Sequence[L], adj: Mapping[L, Sequence[R]]
) -> dict[L, R]:
    """Maximum bipartite matching (Hopcroft-Karp).

    ``adj`` maps each left vertex to its right neighbours; neighbour order
    is respected, so callers can randomise the result by shuffling it.
    """
    pair_l: dict[L, R] = {}
    pair_r: dict[R, L] = {}
    inf = float("inf")

    def bfs() -> tuple[bool, dict[L, float]]:
        dist: dict[L, float] = {}
        queue: deque = deque()
        for u in left:
            if u in pair_l:
                dist[u] = inf
            else:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adj.get(u, ()):
                w = pair_r.get(v)
                if w is None:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found, dist

    def dfs(u: L, dist: dict[L, float]) -> bool:
        # iterative DFS along the layered graph
        stack = [(u, iter(adj.get(u, ())))]
        path: list[tuple[L, R]] = []
        while stack:
            x, it = stack[-1]
            advanced = False
            for v in it:
                w = pair_r.get(v)
                if w is None:
                    path.append((x, v))
                    for a, b in path:
                        pair_l[a] = b
                        pair_r[b] = a
                    return True
                if dist.get(w) == dist[x] + 1:
                    path.append((x, v))
                    stack.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
            if not advanced:
                dist[x] = inf
                stack.pop()
                if path:
                    path.pop()
        return False

    while True:
        found, dist = bfs()
        if not found:
            break
        for u in left:
            if u not in pair_l:
                dfs(u, dist)
    return pair_l


def hall_perfect_matching(
    X: Sequence[L], Y: Sequence[R], adj: Mapping[L, Sequence[R]]
) -> dict[L, R]:
    """Perfect matching of an (X, Y)-bipartite graph, or a Hall violator.

    Raises :class:`HallViolation` carrying a set ``X' ⊆ X`` whose
    neighbourhood is smaller than itself (the X-vertices reachable from an
    unmatched X-vertex by alternating paths).
    """
    if len(X) != len(Y):
        raise SizeMismatch(f"|X|={len(X)} != |Y|={len(Y)}")
    yset = set(Y)
    clean = {x: [y for y in adj.get(x, ()) if y in yset] for x in X}
    pairs = bipartite_matching(X, clean)
    if len(pairs) == len(X):
        return pairs
    pair_r = {y: x for x, y in pairs.items()}
    free = [x for x in X if x not in pairs]
    reach_x = set(free)
    reach_y: set = set()
    queue = deque(free)
    while queue:
        x = queue.popleft()
        for y in clean[x]:
            if y in reach_y:
                continue
            reach_y.add(y)
            w = pair_r.get(y)
            if w is not None and w not in reach_x:
                reach_x.add(w)
                queue.append(w)
    raise HallViolation(frozenset(reach_x), frozenset(reach_y), pairs)


def violates_hall(subset: Iterable[L], adj: Mapping[L, Iterable[R]]) -> bool:
    subset = list(subset)
    nbrs = set()
    for x in subset:
        nbrs.update(adj.get(x, ()))
    return len(nbrs) < len(subset)


def random_equitable_split(items: Iterable, seed: int | random.Random = 0) -> tuple[list, list]:
    """Uniformly random ordered equitable 2-partition (sizes differ by at most one)."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    pool = list(items)
    rng.shuffle(pool)
    k = len(pool)
    cut = k // 2 if k % 2 == 0 or rng.random() < 0.5 else k // 2 + 1
    return pool[:cut], pool[cut:]


def bipartite_density(adj: Mapping[L, Iterable[R]], A: Iterable[L], B: Iterable[R]) -> float:
    """``e(A, B) / (|A||B|)`` for a bipartite adjacency keyed by the A side."""
    A, Bset = list(A), set(B)
    if not A or not Bset:
        return 0.0
    e = sum(1 for a in A for b in adj.get(a, ()) if b in Bset)
    return e / (len(A) * len(Bset))

"""
Near-tilings, links and absorbers
=================================

Sample a dense oriented graph, look at the lexicographic near-tiling,
build a few links and an absorbing set, then run the whole pipeline.
"""

import random

from tt3tiling import find_absorbing_set, find_link, lex_max_tiling, nonextremal_tile, validate_tiling
from tt3tiling.generators import random_with_min_semidegree, semidegree_threshold

n = 60
g = random_with_min_semidegree(n, semidegree_threshold(n), seed=1, drop=0.4)
print(g, "semidegree", g.min_semidegree())

# Local search over covers by triangles, paths, edges and single vertices.
pc = lex_max_tiling(g, seed=1)
print("cover (T, P, F):", pc.potential, "leftover", pc.leftover(), "moves", len(pc.moves))

# A 2-link between two vertices: seven vertices whose two six-vertex ends tile.
w = find_link(g, 0, 1, p=2, rng=random.Random(0))
print("2-link", w.sequence, "valid:", w.validate(g))

# An absorbing set for a triple: 18 vertices that tile alone and together with X.
a = find_absorbing_set(g, (2, 3, 4), seed=0)
print("absorber", sorted(a.U), "valid:", a.validate(g))

# Absorber, near-tiling of the rest, absorption of the leftover.
out = nonextremal_tile(g, seed=0)
print("pipeline:", [s["stage"] for s in out.stats["trace"]])
print("perfect:", validate_tiling(g, out.tiling).perfect)

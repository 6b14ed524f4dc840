"""
The extremal construction and the exact solver
===============================================

Build the five-part graph that sits just below the semidegree threshold,
compare its semidegree with the closed forms, and let the exact solver
show that no perfect transitive-triangle tiling exists.
"""

from tt3tiling import extremal_graph, find_perfect_tiling, max_tiling
from tt3tiling.generators import ExtremalSpec, semidegree_threshold

# Part sizes for n = 18: three cyclic parts W1, W2, W3 and the split U1, U2.
g, parts = extremal_graph(18)
print(ExtremalSpec.for_n(18).sizes, g)

# Every transitive triangle uses a U vertex, and |U| = n/3 - 1,
# so at most five disjoint triangles fit.
res = max_tiling(g)
print("max tiling:", len(res.tiling), "optimal:", res.optimal)

out = find_perfect_tiling(g)
print("perfect tiling:", out.status.value, "certificate:", out.certificate)

# The semidegree, computed directly, against the two closed forms.
# It follows ceil(7n/18) - 1; floor(7n/18) - 1 only agrees when 18 | n.
print(" n  computed  floor-1  ceil-1")
for n in range(9, 46, 3):
    d = extremal_graph(n)[0].min_semidegree()
    print(f"{n:2d}  {d:8d}  {7 * n // 18 - 1:7d}  {semidegree_threshold(n) - 1:6d}")

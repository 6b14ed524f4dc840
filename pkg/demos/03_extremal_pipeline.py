"""
Graphs close to the extremal structure
======================================

Members of the C-family are tiled by balancing the cyclic parts and then
matching U into cross edges.  A damaged U vertex shows the balancing
stages doing work.
"""

import random

from tt3tiling import c_family_graph, extremal_tile
from tt3tiling.extremal import ExtremalConfig
from tt3tiling.graph import OrientedGraph

g, spec = c_family_graph(3, seed=0)
out = extremal_tile(g)
for step in out.stats["trace"]:
    print(step)

# Remove eight arcs from one U vertex into each W part.
g, spec = c_family_graph(8, seed=1)
u = spec.U[0]
rng = random.Random(1)
drop = set()
for part in spec.parts:
    for w in rng.sample([w for w in part if g.adjacent(u, w)], 8):
        drop.add((u, w) if g.has_arc(u, w) else (w, u))
h = OrientedGraph(g.n, [a for a in g.arcs() if a not in drop])

# The desk thresholds are too tight for 144 vertices, so widen tau.
cfg = ExtremalConfig("wide", alpha=0.01, tau=0.13, gamma=0.05, lam=0.05)
out = extremal_tile(h, config=cfg)
for step in out.stats["trace"][1:]:
    print(step)

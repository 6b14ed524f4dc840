"""
Reproducible reports
====================

Sweeps return Report objects: JSON is canonical, CSV is a projection of
the per-instance records.  Same parameters and seed, same bytes.
"""

from tt3tiling.harness import sweep_extremal_bound, sweep_near_tiling, verify_prop_cyctri

rep = verify_prop_cyctri()
print(rep.to_csv())

rep = sweep_extremal_bound([9, 18, 27], exact_up_to=27)
print(rep.verdicts)
print(rep.aggregate)

a = sweep_near_tiling([18, 21, 24], samples=6, seed=7)
b = sweep_near_tiling([18, 21, 24], samples=6, seed=7)
print("identical:", a.to_json() == b.to_json())
print(a.to_csv())

"""
Checking the fast path against slow, obviously-correct ones
===========================================================

The package ships two brute-force spanning tree builders, Prim and
Kruskal, written with none of the solver's machinery: no Morton codes,
no tree, no pruning. They are quadratic (or worse) and capped at small
n, which makes them trustworthy referees.

Because every comparison in the solver uses the same total order on
edges, (weight, smaller endpoint, larger endpoint), the tree it
returns is unique even when distances tie. So the check below is not
"close enough": it demands the same edges, bit for bit.
"""

import numpy as np

from emst import (
    DatasetSpec,
    boruvka_emst,
    brute_core_distances,
    generate,
    kruskal_mst,
    prim_mst,
)

for kind in ("uniform", "normal", "blobs"):
    points = generate(DatasetSpec(kind, n=800, d=2, seed=11))
    fast = boruvka_emst(points)
    slow = prim_mst(points)
    assert np.array_equal(fast.edges, slow.edges)
    assert np.array_equal(fast.weights, slow.weights)
    print(f"{kind:8s} n=800: solver == Prim, {len(fast.weights)} edges,"
          f" weight {fast.total_weight:.6f}")

# Kruskal builds the tree a completely different way (global edge sort
# plus union-find), so agreement between all three is a strong signal.
points = generate(DatasetSpec("uniform", n=500, d=3, seed=12))
fast = boruvka_emst(points)
assert np.array_equal(fast.edges, prim_mst(points).edges)
assert np.array_equal(fast.edges, kruskal_mst(points).edges)
print("uniform  n=500 d=3: solver == Prim == Kruskal")

# Tie stress: a grid has massive weight degeneracy, every neighbor
# pair at exactly the same distance. The total order resolves all of
# it deterministically.
side = 20
g = np.stack(np.meshgrid(np.arange(side), np.arange(side)),
             axis=-1).reshape(-1, 2).astype(np.float32)
assert np.array_equal(boruvka_emst(g).edges, prim_mst(g).edges)
print(f"{side}x{side} grid: all {side * side - 1} tied edges resolved identically")

# The mutual reachability path gets its own referee route: core
# distances by brute-force row scans, then Prim over the induced
# metric.
from emst import CoreDistances, MutualReachability

points = generate(DatasetSpec("normal", n=600, d=2, seed=13))
fast = boruvka_emst(points, metric="mrd", k_pts=8)
cores = CoreDistances(8, brute_core_distances(points, 8))
slow = prim_mst(points, MutualReachability(cores))
assert np.array_equal(fast.edges, slow.edges)
print("mutual reachability k=8: solver == Prim on brute-force cores")

"""
Generating a point set and computing its minimum spanning tree
==============================================================

The shortest possible tour of the library: make some points, solve,
look at what came back.
"""

import numpy as np

from emst import DatasetSpec, boruvka_emst, generate

# Three generators are built in: "uniform" fills the unit box centered
# at the origin, "normal" is a standard Gaussian cloud, and "blobs"
# scatters tight Gaussian clusters. All are seeded and reproducible.
spec = DatasetSpec("blobs", n=5000, d=2, seed=42, blobs=6, spread=0.02)
points = generate(spec)
print(f"dataset: {points.shape[0]} points in {points.shape[1]}D")

# One call does everything: Morton sort, tree construction, and the
# merge rounds. The result carries the edges, weights, and timings.
result = boruvka_emst(points)

print(f"edges:        {len(result.weights)}")
print(f"total weight: {result.total_weight:.6f}")
print(f"rounds:       {result.iterations}")
print(f"components per round: {result.component_counts}")

# Edge weights tell you a lot about structure. With six tight blobs,
# the five longest edges are the bridges between clusters and they
# tower over the within-cluster hops.
w = np.sort(result.weights)
print(f"median edge:  {np.median(w):.6f}")
print(f"5 longest:    {np.round(w[-5:], 4)}")

# The edge list is canonical: u < v in every row, rows sorted by
# (weight, u, v). Running this script twice gives identical output.
for edge in result.edge_list()[:3]:
    print(f"  edge ({edge.u}, {edge.v}) weight {edge.weight:.6f}")

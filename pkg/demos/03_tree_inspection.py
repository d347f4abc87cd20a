"""
Under the hood: Morton order and the bounding volume hierarchy
==============================================================

The solver's spatial index is a binary tree built over points sorted
along the Z-order curve. This script builds one by hand and pokes at
its pieces.
"""

import numpy as np

from emst import (
    DatasetSpec,
    build,
    distance,
    generate,
    morton_codes,
    sort_by_morton,
    traverse_nearest,
)

points = generate(DatasetSpec("uniform", n=2000, d=2, seed=3))

# Step 1: every point gets a Morton code, interleaving the quantized
# coordinate bits. Sorting by code lays the points along a Z-curve,
# so neighbors in the array tend to be neighbors in space.
codes = morton_codes(points)
order = sort_by_morton(points)
print(f"first code: {codes[order[0]]:#018x}")
print(f"last  code: {codes[order[-1]]:#018x}")

hops = np.linalg.norm(
    np.diff(points[order].astype(np.float64), axis=0), axis=1)
random_pairs = np.linalg.norm(
    points[:-1].astype(np.float64) - points[1:].astype(np.float64), axis=1)
print(f"mean gap along curve: {hops.mean():.4f}"
      f"  (vs {random_pairs.mean():.4f} in input order)")

# Step 2: the tree. n leaves, n-1 internal nodes, topology derived
# from longest common code prefixes, boxes fitted bottom-up.
tree = build(points)
print(f"tree: {tree.num_points} leaves, {tree.num_internal} internal nodes")

root_box = tree.node_box(tree.root)
print(f"root box: {np.round(root_box.lo, 3)} .. {np.round(root_box.hi, 3)}")

depth = 0
ref = tree.root
while not tree.is_leaf_ref(ref):
    ref = int(tree.left[ref])
    depth += 1
print(f"leftmost leaf sits at depth {depth}")

# Step 3: queries. traverse_nearest walks the tree depth-first,
# shrinking the search radius as the on_leaf callback reports better
# hits, and prunes subtrees whose box cannot beat the current radius.
# Here we find point 17's nearest other point and check it against
# brute force.
query = 17
found = {"point": -1, "dist": np.inf, "visited": 0}


def on_leaf(p, d):
    found["visited"] += 1
    if p != query and d < found["dist"]:
        found["point"], found["dist"] = p, d
        return d  # tighten the radius
    return None


traverse_nearest(tree, points, points[query], on_leaf=on_leaf)

brute_d, brute_p = min((distance(points[query], points[p]), p)
                       for p in range(len(points)) if p != query)
assert (found["dist"], found["point"]) == (brute_d, brute_p)
print(f"nearest neighbor of {query}: point {found['point']}"
      f" at {found['dist']:.5f}"
      f" ({found['visited']} leaves visited out of {len(points)})")

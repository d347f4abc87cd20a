"""Linear bounding-volume hierarchy over Morton-sorted points.

The tree is the radix tree of the sorted Morton codes: n leaves (one
per point, in Z-order) and n - 1 internal nodes, each internal node
splitting its range where the longest common code prefix ends. Every
internal node's topology is computed independently, so construction
parallelizes per node; duplicate codes are disambiguated by extending
the common-prefix length with the sorted positions, which makes the
augmented keys distinct.

Node references pack both kinds into one integer: values below
n - 1 are internal node indices, values at or above it are
(n - 1) + leaf_slot where leaf_slot indexes the Z-order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DimensionMismatchError,
    InternalInvariantViolation,
    InvalidIndexError,
    TraversalStackOverflowError,
)
from .geometry import Aabb, as_point_array, morton_codes, scene_bounds

# Traversal stacks are fixed-size arrays. Depth is bounded by the code
# width (62 or 63 bits) plus slack for duplicate clusters; 64 entries
# suffice for any non-adversarial input and overflow raises loudly.
STACK_CAPACITY = 64


@dataclass
class Bvh:
    """Flat arrays describing one hierarchy.

    Attributes
    ----------
    num_points : int
        Number of leaves n.
    dim : int
        Coordinate dimension, 2 or 3.
    leaf_perm : ndarray
        (n,) original point index of each Z-order leaf slot.
    left, right : ndarray
        (n - 1,) packed child references of each internal node.
    parent : ndarray
        (n - 1,) parent internal index, -1 for the root.
    leaf_parent : ndarray
        (n,) parent internal index of each leaf slot, -1 when n == 1.
    box_lo, box_hi : ndarray
        (n - 1, d) float32 inclusive bounds of each internal node.
    sweep_order, sweep_starts : ndarray
        Bottom-up level schedule: nodes in sweep_order[sweep_starts[k]:
        sweep_starts[k + 1]] have height k + 1 and depend only on
        earlier levels.
    """

    num_points: int
    dim: int
    leaf_perm: NDArray[np.int64]
    left: NDArray[np.int64]
    right: NDArray[np.int64]
    parent: NDArray[np.int64]
    leaf_parent: NDArray[np.int64]
    box_lo: NDArray[np.float32]
    box_hi: NDArray[np.float32]
    sweep_order: NDArray[np.int64]
    sweep_starts: NDArray[np.int64]

    @property
    def num_internal(self) -> int:
        return self.num_points - 1

    @property
    def num_nodes(self) -> int:
        return 2 * self.num_points - 1

    @property
    def root(self) -> int:
        # With a single point the root is that leaf (ref 0).
        return 0

    def is_leaf_ref(self, ref: int) -> bool:
        return ref >= self.num_internal

    def leaf_slot(self, ref: int) -> int:
        if not self.is_leaf_ref(ref):
            raise InvalidIndexError(f"ref {ref} is an internal node")
        return ref - self.num_internal

    def leaf_ref(self, slot: int) -> int:
        if not 0 <= slot < self.num_points:
            raise InvalidIndexError(f"leaf slot {slot} out of range")
        return self.num_internal + slot

    def node_box(self, internal_index: int) -> Aabb:
        if not 0 <= internal_index < self.num_internal:
            raise InvalidIndexError(f"internal node {internal_index} out of range")
        return Aabb(
            self.box_lo[internal_index].astype(np.float64),
            self.box_hi[internal_index].astype(np.float64),
        )


@njit(cache=True)
def _clz64(x):
    # Count leading zeros of a 64-bit value, 64 for zero.
    if x == np.uint64(0):
        return 64
    n = 0
    if x <= np.uint64(0x00000000FFFFFFFF):
        n += 32
        x <<= np.uint64(32)
    if x <= np.uint64(0x0000FFFFFFFFFFFF):
        n += 16
        x <<= np.uint64(16)
    if x <= np.uint64(0x00FFFFFFFFFFFFFF):
        n += 8
        x <<= np.uint64(8)
    if x <= np.uint64(0x0FFFFFFFFFFFFFFF):
        n += 4
        x <<= np.uint64(4)
    if x <= np.uint64(0x3FFFFFFFFFFFFFFF):
        n += 2
        x <<= np.uint64(2)
    if x <= np.uint64(0x7FFFFFFFFFFFFFFF):
        n += 1
    return n


@njit(cache=True)
def _delta(codes, n, i, j):
    # Length of the common prefix of the augmented keys at sorted
    # positions i and j; -1 outside the array. Equal codes fall back
    # to the positions themselves, 64 bits further down.
    if j < 0 or j >= n:
        return -1
    a = codes[i]
    b = codes[j]
    if a != b:
        return _clz64(a ^ b)
    return 64 + _clz64(np.uint64(i) ^ np.uint64(j))


@njit(parallel=True, cache=True)
def _build_topology(codes, left, right, parent, leaf_parent):
    n = codes.shape[0]
    m = n - 1
    for i in prange(m):
        # Direction of the range whose end sits at i. Augmented keys
        # are distinct, so the two neighbour prefixes never tie.
        d_next = _delta(codes, n, i, i + 1)
        d_prev = _delta(codes, n, i, i - 1)
        d = 1 if d_next > d_prev else -1
        dmin = _delta(codes, n, i, i - d)

        # Exponential probe for an upper bound on the range length,
        # then binary search for the exact other end j.
        lmax = 2
        while _delta(codes, n, i, i + lmax * d) > dmin:
            lmax *= 2
        length = 0
        t = lmax >> 1
        while t >= 1:
            if _delta(codes, n, i, i + (length + t) * d) > dmin:
                length += t
            t >>= 1
        j = i + length * d

        # Binary search for the split: the highest position gamma in
        # [min(i,j), max(i,j)) whose prefix with i exceeds delta(i, j).
        dnode = _delta(codes, n, i, j)
        s = 0
        t = length
        while t > 1:
            t = (t + 1) >> 1
            if _delta(codes, n, i, i + (s + t) * d) > dnode:
                s += t
        gamma = i + s * d + min(d, 0)

        lo = i if i < j else j
        hi = i if i > j else j
        if lo == gamma:
            left[i] = m + gamma
            leaf_parent[gamma] = i
        else:
            left[i] = gamma
            parent[gamma] = i
        if hi == gamma + 1:
            right[i] = m + gamma + 1
            leaf_parent[gamma + 1] = i
        else:
            right[i] = gamma + 1
            parent[gamma + 1] = i


@njit(cache=True)
def _node_heights(left, right, parent):
    # Kahn-style bottom-up pass: a node is ready once both children
    # are resolved; leaves are resolved from the start (height 0).
    m = left.shape[0]
    heights = np.zeros(m, dtype=np.int64)
    resolved = np.zeros(m, dtype=np.int64)
    queue = np.empty(m, dtype=np.int64)
    tail = 0
    for v in range(m):
        k = 0
        if left[v] >= m:
            k += 1
        if right[v] >= m:
            k += 1
        resolved[v] = k
        if k == 2:
            heights[v] = 1
            queue[tail] = v
            tail += 1
    head = 0
    while head < tail:
        v = queue[head]
        head += 1
        p = parent[v]
        if p < 0:
            continue
        resolved[p] += 1
        if resolved[p] == 2:
            hl = 0 if left[p] >= m else heights[left[p]]
            hr = 0 if right[p] >= m else heights[right[p]]
            heights[p] = 1 + (hl if hl > hr else hr)
            queue[tail] = p
            tail += 1
    return heights, tail


@njit(parallel=True, cache=True)
def _refit_boxes(order, starts, left, right, leaf_perm, coords, box_lo, box_hi):
    m = left.shape[0]
    d = coords.shape[1]
    for lev in range(starts.shape[0] - 1):
        for oi in prange(starts[lev], starts[lev + 1]):
            v = order[oi]
            lc = left[v]
            rc = right[v]
            for k in range(d):
                if lc >= m:
                    a_lo = coords[leaf_perm[lc - m], k]
                    a_hi = a_lo
                else:
                    a_lo = box_lo[lc, k]
                    a_hi = box_hi[lc, k]
                if rc >= m:
                    b_lo = coords[leaf_perm[rc - m], k]
                    b_hi = b_lo
                else:
                    b_lo = box_lo[rc, k]
                    b_hi = box_hi[rc, k]
                box_lo[v, k] = a_lo if a_lo < b_lo else b_lo
                box_hi[v, k] = a_hi if a_hi > b_hi else b_hi


@njit(cache=True, inline="always")
def _box_dist(box_lo, box_hi, node, q):
    # Lower bound on the distance from q to any point inside node.
    s = 0.0
    for k in range(q.shape[0]):
        x = q[k]
        lo = np.float64(box_lo[node, k])
        hi = np.float64(box_hi[node, k])
        dx = 0.0
        if x < lo:
            dx = lo - x
        elif x > hi:
            dx = x - hi
        s += dx * dx
    return math.sqrt(s)


@njit(cache=True, inline="always")
def _point_dist(coords, p, q):
    s = 0.0
    for k in range(q.shape[0]):
        dx = q[k] - np.float64(coords[p, k])
        s += dx * dx
    return math.sqrt(s)


def _level_schedule(heights: NDArray[np.int64]) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    order = np.argsort(heights, kind="stable").astype(np.int64)
    if heights.shape[0] == 0:
        return order, np.zeros(1, dtype=np.int64)
    sorted_h = heights[order]
    hmax = int(sorted_h[-1])
    starts = np.empty(hmax + 1, dtype=np.int64)
    starts[:-1] = np.searchsorted(sorted_h, np.arange(1, hmax + 1))
    starts[-1] = heights.shape[0]
    return order, starts


def build(points: ArrayLike) -> Bvh:
    """Build the hierarchy for a point set.

    Points are quantized against their tight bounding box, sorted by
    (Morton code, index), and the radix-tree topology plus fitted boxes
    are computed. Duplicate points are fine; n == 1 yields a leaf-only
    tree.
    """
    pts = as_point_array(points)
    n, d = pts.shape
    bounds = scene_bounds(pts)
    codes = morton_codes(pts, bounds)
    perm = np.argsort(codes, kind="stable").astype(np.int64)

    m = n - 1
    left = np.empty(m, dtype=np.int64)
    right = np.empty(m, dtype=np.int64)
    parent = np.full(m, -1, dtype=np.int64)
    leaf_parent = np.full(n, -1, dtype=np.int64)
    box_lo = np.empty((m, d), dtype=np.float32)
    box_hi = np.empty((m, d), dtype=np.float32)

    if n == 1:
        return Bvh(n, d, perm, left, right, parent, leaf_parent, box_lo, box_hi,
                   np.empty(0, dtype=np.int64), np.zeros(1, dtype=np.int64))

    sorted_codes = np.ascontiguousarray(codes[perm])
    _build_topology(sorted_codes, left, right, parent, leaf_parent)
    if int(np.count_nonzero(parent == -1)) != 1 or parent[0] != -1:
        raise InternalInvariantViolation("hierarchy does not have a unique root at node 0")
    heights, processed = _node_heights(left, right, parent)
    if processed != m:
        raise InternalInvariantViolation("hierarchy contains an unreachable node")
    order, starts = _level_schedule(heights)
    _refit_boxes(order, starts, left, right, perm, pts, box_lo, box_hi)
    return Bvh(n, d, perm, left, right, parent, leaf_parent, box_lo, box_hi, order, starts)


def traverse_nearest(bvh: Bvh, points: ArrayLike, query: ArrayLike, *,
                     on_leaf, prune=None, radius: float = math.inf) -> float:
    """Constrained nearest-neighbour walk from the root.

    Depth-first with an explicit bounded stack; at each internal node
    the nearer child is pushed last so it is explored first. For every
    surviving leaf, ``on_leaf(point_index, dist)`` runs with the exact
    float64 Euclidean distance and may return a new (smaller) search
    radius; returning None keeps the current one. ``prune(ref,
    lower_bound, radius)`` may veto a subtree or leaf before it is
    expanded; the default keeps anything with lower_bound <= radius, so
    ties at the radius are still visited.

    Returns the final radius. This is the reference formulation of the
    search the numba kernels specialize; tests hold them to identical
    results.
    """
    pts = as_point_array(points)
    if pts.shape[0] != bvh.num_points or pts.shape[1] != bvh.dim:
        raise DimensionMismatchError("points array does not match the hierarchy")
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (bvh.dim,):
        raise DimensionMismatchError("query dimension differs from hierarchy dimension")

    m = bvh.num_internal
    coords = pts

    def ref_bound(ref: int) -> float:
        if ref >= m:
            p = int(bvh.leaf_perm[ref - m])
            s = 0.0
            for k in range(bvh.dim):
                dx = q[k] - np.float64(coords[p, k])
                s += dx * dx
            return math.sqrt(s)
        s = 0.0
        for k in range(bvh.dim):
            x = q[k]
            lo = np.float64(bvh.box_lo[ref, k])
            hi = np.float64(bvh.box_hi[ref, k])
            dx = 0.0
            if x < lo:
                dx = lo - x
            elif x > hi:
                dx = x - hi
            s += dx * dx
        return math.sqrt(s)

    root = bvh.root if m > 0 else m  # single point: the leaf itself
    stack = [(root, ref_bound(root))]
    while stack:
        ref, lb = stack.pop()
        if prune is not None:
            if prune(ref, lb, radius):
                continue
        elif lb > radius:
            continue
        if ref >= m:
            new_r = on_leaf(int(bvh.leaf_perm[ref - m]), lb)
            if new_r is not None:
                radius = float(new_r)
            continue
        near = int(bvh.left[ref])
        far = int(bvh.right[ref])
        near_lb = ref_bound(near)
        far_lb = ref_bound(far)
        if far_lb < near_lb:
            near, far = far, near
            near_lb, far_lb = far_lb, near_lb
        if len(stack) + 2 > STACK_CAPACITY:
            raise TraversalStackOverflowError(
                f"traversal exceeded {STACK_CAPACITY} stacked nodes"
            )
        stack.append((far, far_lb))
        stack.append((near, near_lb))
    return radius


def for_each_leaf_to_root(bvh: Bvh, visit) -> None:
    """Bottom-up rendezvous sweep over internal nodes.

    Each leaf climbs toward the root; the first arrival at an internal
    node stops, the second continues, so ``visit(internal_index)`` runs
    exactly once per internal node and only after both of its subtrees
    finished. ``visit`` returning False abandons that climb (ancestors
    that would have been reached through it are then skipped).
    """
    m = bvh.num_internal
    arrivals = np.zeros(m, dtype=np.int64)
    for slot in range(bvh.num_points):
        node = int(bvh.leaf_parent[slot])
        while node >= 0:
            arrivals[node] += 1
            if arrivals[node] < 2:
                break
            if visit(node) is False:
                break
            node = int(bvh.parent[node])

"""Edge-weight metrics: Euclidean and mutual reachability.

Mutual reachability weights a pair by max(core(u), core(v), d(u, v)),
where core(p) is the distance from p to its k_pts-th nearest neighbour
counting p itself. Everything downstream consumes a per-point core
array; the Euclidean case is the same code path with cores of zero,
which makes k_pts = 1 bitwise identical to plain Euclidean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from numpy.typing import ArrayLike, NDArray

from .bvh import STACK_CAPACITY, Bvh, _box_dist, _point_dist
from .errors import (
    DimensionMismatchError,
    InvalidIndexError,
    InvalidParameterError,
    TraversalStackOverflowError,
)
from .geometry import as_point_array, distance

_KNN_BLOCK = 1024


@dataclass(frozen=True)
class Euclidean:
    """Plain Euclidean distance."""


@dataclass(frozen=True)
class CoreDistances:
    """Distance from each point to its k_pts-th nearest neighbour.

    The neighbour count includes the point itself, so k_pts = 1 gives
    all zeros. values[i] is indexed by original point index.
    """

    k_pts: int
    values: NDArray[np.float64]


@dataclass(frozen=True)
class MutualReachability:
    """max(core(u), core(v), Euclidean(u, v)) for a fixed core table."""

    core: CoreDistances


Metric = Euclidean | MutualReachability


def core_array(metric: Metric, n: int) -> NDArray[np.float64]:
    """Per-point core distances for a metric: zeros for Euclidean."""
    if isinstance(metric, Euclidean):
        return np.zeros(n, dtype=np.float64)
    if isinstance(metric, MutualReachability):
        values = np.ascontiguousarray(metric.core.values, dtype=np.float64)
        if values.shape != (n,):
            raise DimensionMismatchError(
                f"core table has {values.shape[0]} entries for {n} points"
            )
        return values
    raise InvalidParameterError(f"unknown metric {metric!r}")


def edge_weight(metric: Metric, u: int, v: int, points: ArrayLike) -> float:
    """Weight of the edge (u, v) under a metric."""
    pts = as_point_array(points)
    n = pts.shape[0]
    for idx in (u, v):
        if not 0 <= idx < n:
            raise InvalidIndexError(f"point index {idx} out of range for {n} points")
    base = distance(pts[u], pts[v])
    if isinstance(metric, Euclidean):
        return base
    cores = core_array(metric, n)
    return max(base, float(cores[u]), float(cores[v]))


@njit(cache=True, inline="always")
def _heap_after(d1, i1, d2, i2):
    # Lexicographic (distance, index) order; True when entry 1 sorts
    # after entry 2. The index key makes the k-th element unique.
    return d1 > d2 or (d1 == d2 and i1 > i2)


@njit(cache=True, inline="always")
def _heap_push(heap_d, heap_i, size, k, dd, p):
    # Bounded max-heap keyed by (distance, index); returns the new size.
    if size < k:
        i = size
        heap_d[i] = dd
        heap_i[i] = p
        while i > 0:
            par = (i - 1) >> 1
            if _heap_after(heap_d[i], heap_i[i], heap_d[par], heap_i[par]):
                heap_d[i], heap_d[par] = heap_d[par], heap_d[i]
                heap_i[i], heap_i[par] = heap_i[par], heap_i[i]
                i = par
            else:
                break
        return size + 1
    if _heap_after(heap_d[0], heap_i[0], dd, p):
        heap_d[0] = dd
        heap_i[0] = p
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            big = i
            if l < size and _heap_after(heap_d[l], heap_i[l], heap_d[big], heap_i[big]):
                big = l
            if r < size and _heap_after(heap_d[r], heap_i[r], heap_d[big], heap_i[big]):
                big = r
            if big == i:
                break
            heap_d[i], heap_d[big] = heap_d[big], heap_d[i]
            heap_i[i], heap_i[big] = heap_i[big], heap_i[i]
            i = big
    return size


@njit(parallel=True, cache=True)
def _knn_core_kernel(coords, leaf_perm, left, right, box_lo, box_hi, k, out, overflow):
    n = coords.shape[0]
    m = n - 1
    d = coords.shape[1]
    nblocks = (n + _KNN_BLOCK - 1) // _KNN_BLOCK
    for b in prange(nblocks):
        qbuf = np.empty(d, dtype=np.float64)
        heap_d = np.empty(k, dtype=np.float64)
        heap_i = np.empty(k, dtype=np.int64)
        node_stack = np.empty(STACK_CAPACITY, dtype=np.int64)
        dist_stack = np.empty(STACK_CAPACITY, dtype=np.float64)
        for s in range(b * _KNN_BLOCK, min(n, (b + 1) * _KNN_BLOCK)):
            qp = leaf_perm[s]
            for kk in range(d):
                qbuf[kk] = np.float64(coords[qp, kk])
            size = 0
            radius = np.inf
            node_stack[0] = 0
            dist_stack[0] = _box_dist(box_lo, box_hi, 0, qbuf)
            top = 1
            while top > 0:
                top -= 1
                lb = dist_stack[top]
                if lb > radius:
                    continue
                ref = node_stack[top]
                lc = left[ref]
                rc = right[ref]
                push_a = -1
                push_a_d = 0.0
                push_b = -1
                push_b_d = 0.0
                for side in range(2):
                    child = lc if side == 0 else rc
                    if child >= m:
                        p = leaf_perm[child - m]
                        dd = _point_dist(coords, p, qbuf)
                        size = _heap_push(heap_d, heap_i, size, k, dd, p)
                        if size == k:
                            radius = heap_d[0]
                    else:
                        bd = _box_dist(box_lo, box_hi, child, qbuf)
                        if bd <= radius:
                            if push_a < 0:
                                push_a = child
                                push_a_d = bd
                            else:
                                push_b = child
                                push_b_d = bd
                if push_b >= 0:
                    if top + 2 > STACK_CAPACITY:
                        overflow[b] = 1
                        top = 0
                        continue
                    # push the farther child first so the nearer is popped first
                    if push_b_d < push_a_d:
                        push_a, push_b = push_b, push_a
                        push_a_d, push_b_d = push_b_d, push_a_d
                    node_stack[top] = push_b
                    dist_stack[top] = push_b_d
                    top += 1
                    node_stack[top] = push_a
                    dist_stack[top] = push_a_d
                    top += 1
                elif push_a >= 0:
                    if top + 1 > STACK_CAPACITY:
                        overflow[b] = 1
                        top = 0
                        continue
                    node_stack[top] = push_a
                    dist_stack[top] = push_a_d
                    top += 1
            out[qp] = heap_d[0]


def compute_core_distances(bvh: Bvh, points: ArrayLike, k_pts: int) -> CoreDistances:
    """k_pts-th nearest-neighbour distance of every point, self included.

    One bounded-radius traversal per point over the shared hierarchy,
    maintaining a max-heap of the k_pts best (distance, index) pairs;
    the search radius is the current k-th best distance, and boxes at
    exactly that distance are still visited so equal-distance
    candidates are never lost.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    if pts.shape[0] != bvh.num_points or pts.shape[1] != bvh.dim:
        raise DimensionMismatchError("points array does not match the hierarchy")
    if not isinstance(k_pts, (int, np.integer)):
        raise InvalidParameterError(f"k_pts must be an integer, got {k_pts!r}")
    k = int(k_pts)
    if k < 1 or k > n:
        raise InvalidParameterError(f"k_pts must be in [1, {n}], got {k}")
    if k == 1:
        # nearest neighbour counting self is self, at distance zero
        return CoreDistances(1, np.zeros(n, dtype=np.float64))
    out = np.empty(n, dtype=np.float64)
    nblocks = (n + _KNN_BLOCK - 1) // _KNN_BLOCK
    overflow = np.zeros(nblocks, dtype=np.uint8)
    _knn_core_kernel(pts, bvh.leaf_perm, bvh.left, bvh.right,
                     bvh.box_lo, bvh.box_hi, k, out, overflow)
    if overflow.any():
        raise TraversalStackOverflowError(
            f"neighbour traversal exceeded {STACK_CAPACITY} stacked nodes"
        )
    return CoreDistances(k, out)

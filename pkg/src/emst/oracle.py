"""Brute-force reference algorithms for small inputs.

Everything here works from explicit O(n^2) scans with no spatial
acceleration, so it shares no traversal logic with the tree engine.
The arithmetic convention is the same on purpose (float64 everywhere,
axis terms accumulated in coordinate order, ties broken by the
(weight, u, v) total order), which is why agreement with the engine
can be exact rather than approximate.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numpy.typing import ArrayLike, NDArray

from .errors import (
    InvalidIndexError,
    InvalidParameterError,
    NoOutgoingEdgeError,
    OracleCapError,
)
from .geometry import as_point_array
from .metric import Euclidean, Metric, core_array
from .mst import MstResult

# Prim touches one row of weights at a time; Kruskal materializes all
# n(n-1)/2 candidate edges at once, hence the tighter cap.
ORACLE_CAP = 5000
KRUSKAL_CAP = 2000


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise OracleCapError(f"{what} is capped at {cap} points, got {n}")


def _weight_row(coords64: NDArray[np.float64], cores: NDArray[np.float64],
                i: int) -> NDArray[np.float64]:
    # Weights from point i to every point, self included (0 under
    # Euclidean, core(i) under mutual reachability).
    dx = coords64[:, 0] - coords64[i, 0]
    s = dx * dx
    dy = coords64[:, 1] - coords64[i, 1]
    s = s + dy * dy
    if coords64.shape[1] == 3:
        dz = coords64[:, 2] - coords64[i, 2]
        s = s + dz * dz
    row = np.sqrt(s)
    np.maximum(row, cores, out=row)
    np.maximum(row, cores[i], out=row)
    return row


def _empty_result() -> MstResult:
    return MstResult(
        edges=np.empty((0, 2), dtype=np.int64),
        weights=np.empty(0, dtype=np.float64),
        total_weight=0.0,
        iterations=0,
    )


def _as_result(eu, ev, ew) -> MstResult:
    order = np.lexsort((ev, eu, ew))
    edges = np.stack([eu[order], ev[order]], axis=1).astype(np.int64)
    weights = ew[order].astype(np.float64)
    return MstResult(
        edges=edges,
        weights=weights,
        total_weight=float(np.sum(weights)),
        iterations=0,
    )


def prim_mst(points: ArrayLike, metric: Metric = Euclidean(),
             cap: int = ORACLE_CAP) -> MstResult:
    """Exact reference tree by Prim's algorithm.

    The frontier keeps, for every vertex outside the tree, its best
    connecting edge under the (weight, u, v) total order; the next
    vertex is the total-order minimum of the frontier. Under a total
    order the minimum spanning tree is unique, so this is the same
    tree any correct algorithm must produce.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    _check_cap(n, cap, "prim_mst")
    if n == 1:
        return _empty_result()
    coords = pts.astype(np.float64)
    cores = core_array(metric, n)

    best_w = _weight_row(coords, cores, 0)
    best_from = np.zeros(n, dtype=np.int64)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    eu = np.empty(n - 1, dtype=np.int64)
    ev = np.empty(n - 1, dtype=np.int64)
    ew = np.empty(n - 1, dtype=np.float64)

    for t in range(n - 1):
        out = np.flatnonzero(~in_tree)
        w = best_w[out]
        f = best_from[out]
        u = np.minimum(f, out)
        v = np.maximum(f, out)
        k = np.lexsort((v, u, w))[0]
        x = int(out[k])
        eu[t] = u[k]
        ev[t] = v[k]
        ew[t] = w[k]
        in_tree[x] = True

        rest = out[out != x]
        if rest.shape[0] == 0:
            break
        nw = _weight_row(coords, cores, x)[rest]
        nu = np.minimum(x, rest)
        nv = np.maximum(x, rest)
        bw = best_w[rest]
        bf = best_from[rest]
        bu = np.minimum(bf, rest)
        bv = np.maximum(bf, rest)
        better = (nw < bw) | ((nw == bw) & ((nu < bu) | ((nu == bu) & (nv < bv))))
        upd = rest[better]
        best_w[upd] = nw[better]
        best_from[upd] = x
    return _as_result(eu, ev, ew)


@njit(cache=True)
def _kruskal_scan(iu, iv, order, parent, out_idx):
    # Union-find sweep over edges in total order; path halving.
    taken = 0
    for oi in range(order.shape[0]):
        e = order[oi]
        a = iu[e]
        b = iv[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            continue
        if a < b:
            parent[b] = a
        else:
            parent[a] = b
        out_idx[taken] = e
        taken += 1
        if taken == out_idx.shape[0]:
            break
    return taken


def kruskal_mst(points: ArrayLike, metric: Metric = Euclidean(),
                cap: int = KRUSKAL_CAP) -> MstResult:
    """Exact reference tree by Kruskal's algorithm.

    Materializes every pair, sorts by (weight, u, v), and scans with a
    union-find. Same unique total-order tree as prim_mst; having two
    independent reference routes lets the tests cross-check them.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    _check_cap(n, cap, "kruskal_mst")
    if n == 1:
        return _empty_result()
    coords = pts.astype(np.float64)
    cores = core_array(metric, n)
    iu, iv = np.triu_indices(n, k=1)
    iu = iu.astype(np.int64)
    iv = iv.astype(np.int64)
    dx = coords[iu, 0] - coords[iv, 0]
    s = dx * dx
    dy = coords[iu, 1] - coords[iv, 1]
    s = s + dy * dy
    if coords.shape[1] == 3:
        dz = coords[iu, 2] - coords[iv, 2]
        s = s + dz * dz
    w = np.sqrt(s)
    np.maximum(w, cores[iu], out=w)
    np.maximum(w, cores[iv], out=w)

    order = np.lexsort((iv, iu, w))
    parent = np.arange(n, dtype=np.int64)
    out_idx = np.empty(n - 1, dtype=np.int64)
    taken = _kruskal_scan(iu, iv, order, parent, out_idx)
    if taken != n - 1:
        raise InvalidParameterError("point set produced a disconnected edge scan")
    sel = out_idx[:taken]
    return _as_result(iu[sel], iv[sel], w[sel])


def brute_knn(points: ArrayLike, query_index: int, k: int,
              metric: Metric = Euclidean()) -> NDArray[np.float64]:
    """k smallest weights from one point to the set, self included.

    Returns them sorted ascending; under the Euclidean metric the
    first entry is the self distance 0.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    if not 0 <= query_index < n:
        raise InvalidIndexError(f"query index {query_index} out of range for {n} points")
    if not 1 <= k <= n:
        raise InvalidParameterError(f"k must be in [1, {n}], got {k}")
    _check_cap(n, ORACLE_CAP, "brute_knn")
    coords = pts.astype(np.float64)
    cores = core_array(metric, n)
    row = _weight_row(coords, cores, query_index)
    return np.sort(row)[:k]


def brute_core_distances(points: ArrayLike, k_pts: int,
                         cap: int = ORACLE_CAP) -> NDArray[np.float64]:
    """k_pts-th nearest-neighbour Euclidean distance per point, self included."""
    pts = as_point_array(points)
    n = pts.shape[0]
    if not 1 <= k_pts <= n:
        raise InvalidParameterError(f"k_pts must be in [1, {n}], got {k_pts}")
    _check_cap(n, cap, "brute_core_distances")
    coords = pts.astype(np.float64)
    zeros = np.zeros(n, dtype=np.float64)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        row = _weight_row(coords, zeros, i)
        out[i] = np.partition(row, k_pts - 1)[k_pts - 1]
    return out


def brute_bichromatic_min(points: ArrayLike, labels: ArrayLike, component: int,
                          metric: Metric = Euclidean()) -> tuple[int, int, float]:
    """Cheapest edge from a component to its complement, total-order ties.

    Returns (u, v, weight) with u < v. This is the value
    find_component_outgoing_edges must report for that component.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    _check_cap(n, ORACLE_CAP, "brute_bichromatic_min")
    lab = np.asarray(labels, dtype=np.int64)
    if lab.shape != (n,):
        raise InvalidParameterError("labels must be one value per point")
    inside = np.flatnonzero(lab == component)
    if inside.shape[0] == 0:
        raise InvalidParameterError(f"no point carries label {component}")
    outside = np.flatnonzero(lab != component)
    if outside.shape[0] == 0:
        raise NoOutgoingEdgeError(f"component {component} covers every point")
    coords = pts.astype(np.float64)
    cores = core_array(metric, n)

    best = None
    for i in inside:
        row = _weight_row(coords, cores, int(i))[outside]
        j = int(np.lexsort((outside, row))[0])
        w = float(row[j])
        p = int(outside[j])
        u, v = (int(i), p) if i < p else (p, int(i))
        key = (w, u, v)
        if best is None or key < best:
            best = key
    return best[1], best[2], best[0]

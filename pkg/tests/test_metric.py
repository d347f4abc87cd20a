import numpy as np
import pytest

from emst import (
    CoreDistances,
    DimensionMismatchError,
    Euclidean,
    InvalidIndexError,
    InvalidParameterError,
    MutualReachability,
    brute_core_distances,
    build,
    compute_core_distances,
    distance,
    edge_weight,
)


def _points(n, d, seed, kind="normal"):
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return (rng.random((n, d)) - 0.5).astype(np.float32)
    return rng.standard_normal((n, d)).astype(np.float32)


def test_first_neighbour_is_self():
    pts = _points(40, 2, 0)
    cores = compute_core_distances(build(pts), pts, 1)
    assert cores.k_pts == 1
    assert np.array_equal(cores.values, np.zeros(40))


def test_two_points_second_neighbour_is_the_other():
    pts = np.float32([[0.0, 0.0], [3.0, 4.0]])
    cores = compute_core_distances(build(pts), pts, 2)
    assert np.array_equal(cores.values, [5.0, 5.0])


@pytest.mark.parametrize("n,d", [(10, 2), (300, 2), (300, 3), (77, 3)])
@pytest.mark.parametrize("k", [2, 4, 16])
def test_core_distances_match_brute_force_exactly(n, d, k):
    if k > n:
        pytest.skip("k exceeds n")
    for seed in range(3):
        pts = _points(n, d, seed, kind="uniform" if seed % 2 else "normal")
        got = compute_core_distances(build(pts), pts, k).values
        want = brute_core_distances(pts, k)
        assert np.array_equal(got, want)


def test_core_distances_with_heavy_ties():
    # an axis-aligned grid makes many neighbour distances coincide
    xs, ys = np.meshgrid(np.arange(8, dtype=np.float32),
                         np.arange(8, dtype=np.float32))
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    for k in (2, 4, 5, 16):
        got = compute_core_distances(build(pts), pts, k).values
        want = brute_core_distances(pts, k)
        assert np.array_equal(got, want)


def test_duplicate_points_have_zero_core_distance():
    pts = np.concatenate([np.tile(np.float32([[0.5, 0.5]]), (5, 1)),
                          _points(20, 2, 3)])
    cores = compute_core_distances(build(pts), pts, 4).values
    assert np.all(cores[:5] == 0.0)


def test_core_distance_parameter_bounds():
    pts = _points(10, 2, 4)
    tree = build(pts)
    with pytest.raises(InvalidParameterError):
        compute_core_distances(tree, pts, 0)
    with pytest.raises(InvalidParameterError):
        compute_core_distances(tree, pts, 11)
    with pytest.raises(InvalidParameterError):
        compute_core_distances(tree, pts, 2.5)
    with pytest.raises(DimensionMismatchError):
        compute_core_distances(tree, pts[:5], 2)


def test_edge_weight_euclidean_is_plain_distance():
    pts = _points(20, 3, 5)
    w = edge_weight(Euclidean(), 3, 11, pts)
    assert w == distance(pts[3], pts[11])
    assert w == edge_weight(Euclidean(), 11, 3, pts)


def test_edge_weight_mutual_reachability_takes_the_max():
    pts = np.float32([[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]])
    cores = CoreDistances(2, np.float64([1.0, 1.0, 3.0]))
    metric = MutualReachability(cores)
    assert edge_weight(metric, 0, 1, pts) == 1.0   # distance ties the cores
    assert edge_weight(metric, 0, 2, pts) == 3.0   # core of 2 dominates
    assert edge_weight(metric, 1, 2, pts) == np.sqrt(10.0)  # distance dominates


def test_mutual_reachability_dominates_euclidean():
    pts = _points(60, 2, 6)
    tree = build(pts)
    cores = compute_core_distances(tree, pts, 5)
    metric = MutualReachability(cores)
    for u in range(0, 60, 7):
        for v in range(u + 1, 60, 11):
            assert edge_weight(metric, u, v, pts) >= distance(pts[u], pts[v])
            assert edge_weight(metric, u, v, pts) >= cores.values[u]
            assert edge_weight(metric, u, v, pts) >= cores.values[v]


def test_k_one_mutual_reachability_equals_euclidean():
    pts = _points(30, 2, 7)
    metric = MutualReachability(CoreDistances(1, np.zeros(30)))
    for u in range(0, 30, 5):
        for v in range(u + 1, 30, 3):
            assert edge_weight(metric, u, v, pts) == edge_weight(Euclidean(), u, v, pts)


def test_edge_weight_index_validation():
    pts = _points(5, 2, 8)
    with pytest.raises(InvalidIndexError):
        edge_weight(Euclidean(), 0, 5, pts)
    with pytest.raises(InvalidIndexError):
        edge_weight(Euclidean(), -1, 2, pts)


def test_core_table_must_match_point_count():
    pts = _points(6, 2, 9)
    metric = MutualReachability(CoreDistances(2, np.zeros(4)))
    with pytest.raises(DimensionMismatchError):
        edge_weight(metric, 0, 1, pts)

"""Euclidean and mutual-reachability minimum spanning trees.

A single shared bounding-volume hierarchy over Morton-sorted points
drives every phase of a parallel Boruvka loop: component labels are
reduced onto tree nodes, per-component search radii are seeded from
Z-order neighbours, and each point finds its component's cheapest
outgoing edge with one constrained nearest-neighbour traversal.
"""

from .bvh import STACK_CAPACITY, Bvh, build, for_each_leaf_to_root, traverse_nearest
from .data import (
    DatasetSpec,
    generate,
    read_edges,
    read_points,
    sample,
    write_edges,
    write_points,
)
from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    EmstError,
    InternalInvariantViolation,
    InvalidCoordinateError,
    InvalidIndexError,
    InvalidParameterError,
    NoOutgoingEdgeError,
    NothingToFindError,
    OracleCapError,
    ParseError,
    TraversalStackOverflowError,
    UnsupportedDimensionError,
)
from .geometry import (
    Aabb,
    as_point_array,
    distance,
    distance_point_box,
    morton_codes,
    morton_encode,
    scene_bounds,
    sort_by_morton,
)
from .metric import (
    CoreDistances,
    Euclidean,
    MutualReachability,
    compute_core_distances,
    edge_weight,
)
from .mst import (
    MIXED,
    ComponentState,
    MstResult,
    OutgoingEdges,
    WeightedEdge,
    boruvka_emst,
    compute_upper_bounds,
    find_component_outgoing_edges,
    merge_components,
    reduce_labels,
)
from .oracle import (
    brute_bichromatic_min,
    brute_core_distances,
    brute_knn,
    kruskal_mst,
    prim_mst,
)

__all__ = [
    "Aabb",
    "Bvh",
    "ComponentState",
    "CoreDistances",
    "DatasetSpec",
    "DimensionMismatchError",
    "EmptyDatasetError",
    "EmstError",
    "Euclidean",
    "InternalInvariantViolation",
    "InvalidCoordinateError",
    "InvalidIndexError",
    "InvalidParameterError",
    "MIXED",
    "MstResult",
    "MutualReachability",
    "NoOutgoingEdgeError",
    "NothingToFindError",
    "OracleCapError",
    "OutgoingEdges",
    "ParseError",
    "STACK_CAPACITY",
    "TraversalStackOverflowError",
    "UnsupportedDimensionError",
    "WeightedEdge",
    "as_point_array",
    "boruvka_emst",
    "brute_bichromatic_min",
    "brute_core_distances",
    "brute_knn",
    "build",
    "compute_core_distances",
    "compute_upper_bounds",
    "distance",
    "distance_point_box",
    "edge_weight",
    "find_component_outgoing_edges",
    "for_each_leaf_to_root",
    "generate",
    "kruskal_mst",
    "merge_components",
    "morton_codes",
    "morton_encode",
    "prim_mst",
    "read_edges",
    "read_points",
    "reduce_labels",
    "sample",
    "scene_bounds",
    "sort_by_morton",
    "traverse_nearest",
    "write_edges",
    "write_points",
]

__version__ = "0.1.0"

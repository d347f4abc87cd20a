"""Points, bounding boxes, distances, and Z-order (Morton) machinery.

Coordinates are stored as 32-bit floats. Every distance, weight, and
comparison is computed in 64-bit arithmetic with a fixed per-axis
summation order, so independently written code paths (tree traversal,
brute-force scans) produce bit-identical values for the same pair of
points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    InvalidCoordinateError,
    UnsupportedDimensionError,
)

# Quantization widths chosen so interleaved codes fit one 64-bit word:
# 2 * 31 = 62 bits in 2D, 3 * 21 = 63 bits in 3D.
MORTON_BITS_2D = 31
MORTON_BITS_3D = 21

# Largest double strictly below 1.0; clamping to it keeps quantized
# cells inside [0, 2**bits - 1] even for points on the upper boundary.
_BELOW_ONE = np.nextafter(1.0, 0.0)


def as_point_array(points: ArrayLike) -> NDArray[np.float32]:
    """Validate and normalize a point set to a (n, d) float32 array.

    Parameters
    ----------
    points : array_like
        Sequence of n points in 2 or 3 dimensions.

    Returns
    -------
    ndarray
        C-contiguous float32 array of shape (n, d).

    Raises
    ------
    EmptyDatasetError
        If n == 0.
    UnsupportedDimensionError
        If d is not 2 or 3.
    InvalidCoordinateError
        If any coordinate is NaN or infinite.
    """
    arr = np.asarray(points)
    if arr.ndim != 2:
        raise UnsupportedDimensionError(
            f"expected a 2-dimensional (n, d) array, got ndim={arr.ndim}"
        )
    n, d = arr.shape
    if n == 0:
        raise EmptyDatasetError("point set is empty")
    if d not in (2, 3):
        raise UnsupportedDimensionError(f"points must have 2 or 3 coordinates, got {d}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr).all(axis=1))[0])
        raise InvalidCoordinateError(f"point {bad} has a non-finite coordinate")
    return np.ascontiguousarray(arr, dtype=np.float32)


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box with inclusive float64 corners."""

    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatchError("box corners must be 1-d arrays of equal length")
        if np.any(lo > hi):
            raise InvalidCoordinateError("box has lo > hi on some axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def contains(self, point: ArrayLike) -> bool:
        p = np.asarray(point, dtype=np.float64)
        if p.shape != self.lo.shape:
            raise DimensionMismatchError("point dimension differs from box dimension")
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


def scene_bounds(points: ArrayLike) -> Aabb:
    """Tight inclusive bounding box of a non-empty point set."""
    pts = as_point_array(points)
    return Aabb(pts.min(axis=0).astype(np.float64), pts.max(axis=0).astype(np.float64))


def distance(u: ArrayLike, v: ArrayLike) -> float:
    """Euclidean distance, evaluated in float64.

    Axis terms are accumulated in coordinate order; the traversal
    kernels use the same order, so both sides agree bitwise.
    """
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(
            f"distance needs two points of equal dimension, got {a.shape} and {b.shape}"
        )
    s = 0.0
    for k in range(a.shape[0]):
        dx = a[k] - b[k]
        s += dx * dx
    return math.sqrt(s)


def distance_point_box(point: ArrayLike, box: Aabb) -> float:
    """Distance from a point to the nearest face of a box, 0 inside."""
    p = np.asarray(point, dtype=np.float64)
    if p.shape != box.lo.shape:
        raise DimensionMismatchError("point dimension differs from box dimension")
    s = 0.0
    for k in range(p.shape[0]):
        dx = 0.0
        if p[k] < box.lo[k]:
            dx = box.lo[k] - p[k]
        elif p[k] > box.hi[k]:
            dx = p[k] - box.hi[k]
        s += dx * dx
    return math.sqrt(s)


@njit(cache=True)
def _spread2(v):
    # Insert one zero bit between the low 31 bits of v.
    x = np.uint64(v)
    x &= np.uint64(0x7FFFFFFF)
    x = (x | (x << np.uint64(16))) & np.uint64(0x0000FFFF0000FFFF)
    x = (x | (x << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    x = (x | (x << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    x = (x | (x << np.uint64(2))) & np.uint64(0x3333333333333333)
    x = (x | (x << np.uint64(1))) & np.uint64(0x5555555555555555)
    return x


@njit(cache=True)
def _spread3(v):
    # Insert two zero bits between the low 21 bits of v.
    x = np.uint64(v)
    x &= np.uint64(0x1FFFFF)
    x = (x | (x << np.uint64(32))) & np.uint64(0x1F00000000FFFF)
    x = (x | (x << np.uint64(16))) & np.uint64(0x1F0000FF0000FF)
    x = (x | (x << np.uint64(8))) & np.uint64(0x100F00F00F00F00F)
    x = (x | (x << np.uint64(4))) & np.uint64(0x10C30C30C30C30C3)
    x = (x | (x << np.uint64(2))) & np.uint64(0x1249249249249249)
    return x


@njit(cache=True)
def _cell(x, lo, inv, below_one, scale):
    # Quantize one float64 coordinate to an integer lattice cell.
    t = (x - lo) * inv
    if t < 0.0:
        t = 0.0
    elif t > below_one:
        t = below_one
    return np.uint64(t * scale)


@njit(parallel=True, cache=True)
def _codes_2d(coords, lo0, lo1, inv0, inv1, out):
    scale = np.float64(2.0 ** MORTON_BITS_2D)
    for i in prange(coords.shape[0]):
        cx = _cell(np.float64(coords[i, 0]), lo0, inv0, _BELOW_ONE, scale)
        cy = _cell(np.float64(coords[i, 1]), lo1, inv1, _BELOW_ONE, scale)
        # x occupies the higher bit of each pair
        out[i] = (_spread2(cx) << np.uint64(1)) | _spread2(cy)


@njit(parallel=True, cache=True)
def _codes_3d(coords, lo0, lo1, lo2, inv0, inv1, inv2, out):
    scale = np.float64(2.0 ** MORTON_BITS_3D)
    for i in prange(coords.shape[0]):
        cx = _cell(np.float64(coords[i, 0]), lo0, inv0, _BELOW_ONE, scale)
        cy = _cell(np.float64(coords[i, 1]), lo1, inv1, _BELOW_ONE, scale)
        cz = _cell(np.float64(coords[i, 2]), lo2, inv2, _BELOW_ONE, scale)
        # x most significant, then y, then z
        out[i] = (_spread3(cx) << np.uint64(2)) | (_spread3(cy) << np.uint64(1)) | _spread3(cz)


def _axis_inverses(bounds: Aabb) -> NDArray[np.float64]:
    ext = bounds.hi - bounds.lo
    inv = np.zeros_like(ext)
    nz = ext > 0.0
    inv[nz] = 1.0 / ext[nz]  # zero-extent axes map every point to cell 0
    return inv


def morton_codes(points: ArrayLike, bounds: Aabb | None = None) -> NDArray[np.uint64]:
    """Morton codes for every point, quantized against `bounds`.

    With the default bounds (the tight scene box) the codes follow the
    Z-order curve over the data. 2D codes use 62 bits, 3D codes 63.
    """
    pts = as_point_array(points)
    if bounds is None:
        bounds = scene_bounds(pts)
    if bounds.dim != pts.shape[1]:
        raise DimensionMismatchError("bounds dimension differs from point dimension")
    inv = _axis_inverses(bounds)
    lo = bounds.lo
    out = np.empty(pts.shape[0], dtype=np.uint64)
    if pts.shape[1] == 2:
        _codes_2d(pts, lo[0], lo[1], inv[0], inv[1], out)
    else:
        _codes_3d(pts, lo[0], lo[1], lo[2], inv[0], inv[1], inv[2], out)
    return out


def morton_encode(point: ArrayLike, bounds: Aabb) -> int:
    """Morton code of a single point within `bounds`.

    Points on (or slightly outside) the boundary are clamped into the
    box before quantization.
    """
    p = np.asarray(point, dtype=np.float64)
    if p.ndim != 1:
        raise UnsupportedDimensionError("morton_encode takes a single point")
    if p.shape[0] != bounds.dim:
        raise DimensionMismatchError("point dimension differs from bounds dimension")
    if not np.all(np.isfinite(p)):
        raise InvalidCoordinateError("point has a non-finite coordinate")
    code = morton_codes(p[None, :].astype(np.float32), bounds)
    return int(code[0])


def sort_by_morton(points: ArrayLike, bounds: Aabb | None = None) -> NDArray[np.int64]:
    """Permutation ordering points by (Morton code, original index).

    The secondary index key makes the order total even when distinct
    points share a quantized cell.
    """
    codes = morton_codes(points, bounds)
    return np.argsort(codes, kind="stable").astype(np.int64)

"""Dataset generation, sampling, and the point / edge file formats.

All randomness flows through numpy's default PCG64 generator seeded
explicitly, so every dataset and subsample is reproducible from its
(kind, n, d, seed) tuple alone.

Point CSV: one point per line, comma-separated coordinates printed
with 9 significant digits (lossless for float32). Point binary: a
24-byte little-endian header (magic "EMST", version u32, count u64,
dimension u32, precision u32 in {4, 8}) followed by row-major
coordinates at that precision. Edge CSV: "u,v,weight" per line with
the weight printed with 17 significant digits (lossless for float64).
"""

from __future__ import annotations

import io
import math
import struct
import sys
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    EmptyDatasetError,
    InvalidParameterError,
    ParseError,
)
from .geometry import as_point_array

_MAGIC = b"EMST"
_VERSION = 1
_HEADER = struct.Struct("<4sIQII")

_KINDS = ("uniform", "normal", "blobs")


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for a synthetic dataset.

    uniform: i.i.d. in the unit square / cube centered at the origin.
    normal:  i.i.d. standard normal per axis.
    blobs:   `blobs` uniform centers in [-0.5, 0.5]^d, points assigned
             uniformly and offset by spread * standard normal.
    """

    kind: str
    n: int
    d: int
    seed: int
    blobs: int = 8
    spread: float = 0.05

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidParameterError(
                f"kind must be one of {', '.join(_KINDS)}, got {self.kind!r}")
        if self.n < 1:
            raise EmptyDatasetError("dataset size must be at least 1")
        if self.d not in (2, 3):
            raise InvalidParameterError(f"dimension must be 2 or 3, got {self.d}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {self.seed}")
        if self.blobs < 1:
            raise InvalidParameterError(f"blob count must be >= 1, got {self.blobs}")
        if not math.isfinite(self.spread) or self.spread < 0:
            raise InvalidParameterError(f"spread must be finite and >= 0, got {self.spread}")


def generate(spec: DatasetSpec) -> NDArray[np.float32]:
    """Deterministic synthetic points for a spec."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "uniform":
        pts = rng.random((spec.n, spec.d)) - 0.5
    elif spec.kind == "normal":
        pts = rng.standard_normal((spec.n, spec.d))
    else:
        centers = rng.uniform(-0.5, 0.5, (spec.blobs, spec.d))
        assign = rng.integers(0, spec.blobs, spec.n)
        pts = centers[assign] + rng.standard_normal((spec.n, spec.d)) * spec.spread
    return np.ascontiguousarray(pts, dtype=np.float32)


def sample(points: ArrayLike, m: int, seed: int) -> NDArray[np.float32]:
    """Uniform subset of m points without replacement, seeded.

    The subset keeps the random permutation order, so sample(pts, n,
    seed) is a shuffle.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    if not 1 <= m <= n:
        raise InvalidParameterError(f"sample size must be in [1, {n}], got {m}")
    rng = np.random.default_rng(seed)
    idx = rng.permutation(n)[:m]
    return np.ascontiguousarray(pts[idx])


def _open_out(dest, binary: bool):
    if dest == "-" or dest is None:
        raw = sys.stdout.buffer if binary else sys.stdout
        return raw, False
    if hasattr(dest, "write"):
        return dest, False
    return open(dest, "wb" if binary else "w"), True


def _open_in(source, binary: bool):
    if source == "-" or source is None:
        raw = sys.stdin.buffer if binary else sys.stdin
        return raw, False
    if hasattr(source, "read"):
        return source, False
    return open(source, "rb" if binary else "r"), True


def write_points(dest, points: ArrayLike, fmt: str = "csv", precision: int = 4) -> None:
    """Write points as CSV or binary; dest may be a path, '-', or a file."""
    pts = as_point_array(points)
    if fmt == "csv":
        fh, close = _open_out(dest, binary=False)
        try:
            for row in pts:
                fh.write(",".join(f"{float(x):.9g}" for x in row))
                fh.write("\n")
        finally:
            if close:
                fh.close()
    elif fmt == "bin":
        if precision not in (4, 8):
            raise InvalidParameterError(f"precision must be 4 or 8 bytes, got {precision}")
        payload = pts.astype(np.float32 if precision == 4 else np.float64)
        header = _HEADER.pack(_MAGIC, _VERSION, pts.shape[0], pts.shape[1], precision)
        fh, close = _open_out(dest, binary=True)
        try:
            fh.write(header)
            fh.write(payload.astype(payload.dtype.newbyteorder("<")).tobytes(order="C"))
        finally:
            if close:
                fh.close()
    else:
        raise InvalidParameterError(f"format must be 'csv' or 'bin', got {fmt!r}")


def read_points(source, fmt: str = "csv") -> NDArray[np.float32]:
    """Read points from CSV or binary; source may be a path, '-', or a file."""
    if fmt == "csv":
        fh, close = _open_in(source, binary=False)
        try:
            rows: list[tuple[float, ...]] = []
            width = -1
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                fields = line.split(",")
                if width == -1:
                    width = len(fields)
                    if width not in (2, 3):
                        raise ParseError(
                            f"expected 2 or 3 coordinates, found {width}", lineno)
                elif len(fields) != width:
                    raise ParseError(
                        f"expected {width} coordinates, found {len(fields)}", lineno)
                try:
                    values = tuple(float(f) for f in fields)
                except ValueError:
                    raise ParseError(f"could not parse {line!r}", lineno) from None
                if not all(math.isfinite(v) for v in values):
                    raise ParseError("coordinate is not finite", lineno)
                rows.append(values)
        finally:
            if close:
                fh.close()
        if not rows:
            raise EmptyDatasetError("input contains no points")
        return np.asarray(rows, dtype=np.float32)
    if fmt == "bin":
        fh, close = _open_in(source, binary=True)
        try:
            blob = fh.read()
        finally:
            if close:
                fh.close()
        if len(blob) < _HEADER.size:
            raise ParseError("input shorter than the binary header")
        magic, version, n, d, precision = _HEADER.unpack_from(blob)
        if magic != _MAGIC:
            raise ParseError(f"bad magic {magic!r}")
        if version != _VERSION:
            raise ParseError(f"unsupported version {version}")
        if d not in (2, 3):
            raise ParseError(f"unsupported dimension {d}")
        if precision not in (4, 8):
            raise ParseError(f"unsupported precision {precision}")
        if n < 1:
            raise EmptyDatasetError("input contains no points")
        expected = _HEADER.size + n * d * precision
        if len(blob) != expected:
            raise ParseError(f"payload is {len(blob)} bytes, expected {expected}")
        dtype = np.dtype("<f4" if precision == 4 else "<f8")
        flat = np.frombuffer(blob, dtype=dtype, offset=_HEADER.size)
        return as_point_array(flat.reshape(n, d))
    raise InvalidParameterError(f"format must be 'csv' or 'bin', got {fmt!r}")


def write_edges(dest, edges: NDArray[np.int64], weights: NDArray[np.float64]) -> None:
    """Write an edge list as "u,v,weight" lines; float64-lossless weights."""
    edges = np.asarray(edges, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if edges.ndim != 2 or edges.shape[1] != 2 or edges.shape[0] != weights.shape[0]:
        raise InvalidParameterError("edges must be (m, 2) with matching weights")
    fh, close = _open_out(dest, binary=False)
    try:
        for (u, v), w in zip(edges, weights):
            fh.write(f"{int(u)},{int(v)},{float(w):.17g}\n")
    finally:
        if close:
            fh.close()


def read_edges(source) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Read a "u,v,weight" edge list; returns edges (m, 2) and weights."""
    fh, close = _open_in(source, binary=False)
    try:
        us: list[int] = []
        vs: list[int] = []
        ws: list[float] = []
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise ParseError(f"expected u,v,weight, found {len(fields)} fields", lineno)
            try:
                u = int(fields[0])
                v = int(fields[1])
                w = float(fields[2])
            except ValueError:
                raise ParseError(f"could not parse {line!r}", lineno) from None
            if u < 0 or v < 0:
                raise ParseError("endpoints must be non-negative", lineno)
            if not math.isfinite(w):
                raise ParseError("weight is not finite", lineno)
            us.append(u)
            vs.append(v)
            ws.append(w)
    finally:
        if close:
            fh.close()
    edges = np.stack([np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)], axis=1) \
        if us else np.empty((0, 2), dtype=np.int64)
    return edges, np.asarray(ws, dtype=np.float64)

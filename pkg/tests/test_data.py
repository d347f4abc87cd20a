import io
import struct

import numpy as np
import pytest

from emst import (
    DatasetSpec,
    EmptyDatasetError,
    InvalidParameterError,
    ParseError,
    generate,
    read_edges,
    read_points,
    sample,
    write_edges,
    write_points,
)


def test_generation_is_deterministic():
    for kind in ("uniform", "normal", "blobs"):
        spec = DatasetSpec(kind, 500, 2, seed=7)
        a = generate(spec)
        b = generate(spec)
        assert a.dtype == np.float32 and a.shape == (500, 2)
        assert np.array_equal(a, b)
        c = generate(DatasetSpec(kind, 500, 2, seed=8))
        assert not np.array_equal(a, c)


def test_uniform_range_and_spread():
    pts = generate(DatasetSpec("uniform", 100_000, 3, seed=0))
    assert pts.min() >= -0.5 and pts.max() < 0.5
    assert abs(pts.mean()) < 0.01


def test_normal_moments():
    pts = generate(DatasetSpec("normal", 100_000, 2, seed=1))
    assert abs(pts.mean()) < 0.02
    assert abs(pts.std() - 1.0) < 0.02


def test_blobs_cluster_structure():
    pts = generate(DatasetSpec("blobs", 4000, 2, seed=2, blobs=4, spread=0.01))
    # tight blobs: many points, few distinct neighbourhoods; check that
    # coordinates concentrate around at most 4 centers per axis
    from emst import boruvka_emst
    res = boruvka_emst(pts)
    # the 3 largest MST edges bridge clusters and dwarf the in-cluster hops
    w = np.sort(res.weights)
    assert w[-3] > 10 * np.median(w)


def test_blobs_parameter_defaults():
    spec = DatasetSpec("blobs", 100, 2, seed=3)
    assert spec.blobs == 8 and spec.spread == 0.05
    assert generate(spec).shape == (100, 2)


def test_dataset_spec_validation():
    with pytest.raises(EmptyDatasetError):
        DatasetSpec("uniform", 0, 2, seed=0)
    with pytest.raises(InvalidParameterError):
        DatasetSpec("uniform", 10, 4, seed=0)
    with pytest.raises(InvalidParameterError):
        DatasetSpec("swirl", 10, 2, seed=0)
    with pytest.raises(InvalidParameterError):
        DatasetSpec("blobs", 10, 2, seed=0, blobs=0)
    with pytest.raises(InvalidParameterError):
        DatasetSpec("blobs", 10, 2, seed=0, spread=-1.0)


def test_sample_is_a_deterministic_subset():
    pts = generate(DatasetSpec("uniform", 1000, 2, seed=4))
    sub = sample(pts, 100, seed=5)
    assert sub.shape == (100, 2)
    assert np.array_equal(sub, sample(pts, 100, seed=5))
    rows = {tuple(r) for r in pts.tolist()}
    assert all(tuple(r) in rows for r in sub.tolist())
    full = sample(pts, 1000, seed=6)
    assert sorted(map(tuple, full.tolist())) == sorted(map(tuple, pts.tolist()))
    with pytest.raises(InvalidParameterError):
        sample(pts, 0, seed=0)
    with pytest.raises(InvalidParameterError):
        sample(pts, 1001, seed=0)


def test_csv_round_trip(tmp_path):
    pts = generate(DatasetSpec("normal", 257, 3, seed=7))
    path = tmp_path / "p.csv"
    write_points(path, pts, fmt="csv")
    back = read_points(path, fmt="csv")
    assert back.dtype == np.float32
    assert np.array_equal(pts, back)


def test_csv_round_trip_via_streams():
    pts = generate(DatasetSpec("uniform", 64, 2, seed=8))
    buf = io.StringIO()
    write_points(buf, pts, fmt="csv")
    back = read_points(io.StringIO(buf.getvalue()), fmt="csv")
    assert np.array_equal(pts, back)


@pytest.mark.parametrize("precision", [4, 8])
def test_binary_round_trip(tmp_path, precision):
    pts = generate(DatasetSpec("normal", 300, 2, seed=9))
    path = tmp_path / "p.bin"
    write_points(path, pts, fmt="bin", precision=precision)
    back = read_points(path, fmt="bin")
    assert np.array_equal(pts, back)
    # stable bytes on re-write
    path2 = tmp_path / "q.bin"
    write_points(path2, back, fmt="bin", precision=precision)
    assert path.read_bytes() == path2.read_bytes()


def test_binary_header_layout(tmp_path):
    pts = np.float32([[1.0, 2.0], [3.0, 4.0]])
    path = tmp_path / "p.bin"
    write_points(path, pts, fmt="bin", precision=4)
    raw = path.read_bytes()
    magic, version, n, d, precision = struct.unpack("<4sIQII", raw[:24])
    assert magic == b"EMST" and version == 1
    assert (n, d, precision) == (2, 2, 4)
    payload = np.frombuffer(raw[24:], dtype="<f4").reshape(2, 2)
    assert np.array_equal(payload, pts)


def test_binary_rejects_corruption(tmp_path):
    pts = np.float32([[1.0, 2.0], [3.0, 4.0]])
    path = tmp_path / "p.bin"
    write_points(path, pts, fmt="bin")
    raw = bytearray(path.read_bytes())

    bad_magic = tmp_path / "m.bin"
    bad_magic.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(ParseError):
        read_points(bad_magic, fmt="bin")

    truncated = tmp_path / "t.bin"
    truncated.write_bytes(bytes(raw[:-4]))
    with pytest.raises(ParseError):
        read_points(truncated, fmt="bin")

    bad_version = tmp_path / "v.bin"
    raw2 = bytearray(raw)
    raw2[4] = 9
    bad_version.write_bytes(bytes(raw2))
    with pytest.raises(ParseError):
        read_points(bad_version, fmt="bin")


def test_csv_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 2"):
        read_points(io.StringIO("1.0,2.0\n3.0\n"), fmt="csv")
    with pytest.raises(ParseError, match="line 1"):
        read_points(io.StringIO("a,b\n"), fmt="csv")
    with pytest.raises(ParseError, match="line 3"):
        read_points(io.StringIO("1,2\n3,4\n5,inf\n"), fmt="csv")
    with pytest.raises(EmptyDatasetError):
        read_points(io.StringIO(""), fmt="csv")


def test_edge_file_round_trip(tmp_path):
    edges = np.int64([[0, 1], [1, 2]])
    weights = np.float64([0.125, 1.0 / 3.0])
    path = tmp_path / "e.csv"
    write_edges(path, edges, weights)
    e2, w2 = read_edges(path)
    assert np.array_equal(edges, e2)
    assert np.array_equal(weights, w2)  # %.17g keeps float64 exact


def test_edge_parse_errors():
    with pytest.raises(ParseError, match="line 1"):
        read_edges(io.StringIO("0,1\n"))
    with pytest.raises(ParseError, match="line 2"):
        read_edges(io.StringIO("0,1,1.0\n-1,2,1.0\n"))
    with pytest.raises(ParseError, match="line 1"):
        read_edges(io.StringIO("0,1,nan\n"))

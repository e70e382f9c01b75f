import json

import numpy as np
import pytest

from glcell.energy import DiscreteField
from glcell.grid import CellConfig, WrapRule, build_grid
from glcell.snapshot import MAGIC, SnapshotError, read_snapshot, write_snapshot


def make_field(n=32, N=1, b=0.5, seed=0):
    g = build_grid(CellConfig(b=b, N=N, n=n))
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return DiscreteField(u=u, grid=g, wrap=WrapRule(n=n, N=N)), b


def test_round_trip_bit_identical(tmp_path):
    f, b = make_field()
    p1 = tmp_path / "a.glc"
    p2 = tmp_path / "b.glc"
    write_snapshot(p1, f, b)
    g, b2 = read_snapshot(p1)
    assert b2 == b
    assert np.array_equal(g.u, f.u)  # bit-identical payload
    write_snapshot(p2, g, b2)
    pay1 = p1.read_bytes().split(b"\n", 1)[1]
    pay2 = p2.read_bytes().split(b"\n", 1)[1]
    assert pay1 == pay2


def test_header_format(tmp_path):
    f, b = make_field()
    p = tmp_path / "a.glc"
    write_snapshot(p, f, b)
    blob = p.read_bytes()
    assert blob.startswith(MAGIC)
    head = blob[len(MAGIC):blob.index(b"\n")].decode("ascii")
    meta = json.loads(head)
    assert meta["version"] == 1
    assert meta["layout"] == "row-major"
    assert meta["dtype"] == "f64le"
    assert meta["channels"] == ["re", "im"]
    assert meta["n"] == f.grid.n and meta["N"] == f.grid.N
    # payload: i fastest, interleaved re/im little-endian
    payload = blob[blob.index(b"\n") + 1:]
    assert len(payload) == 16 * f.grid.n**2
    first = np.frombuffer(payload[:32], dtype="<f8")
    assert first[0] == f.u[0, 0].real and first[1] == f.u[0, 0].imag
    assert first[2] == f.u[1, 0].real and first[3] == f.u[1, 0].imag


def test_payload_length_mismatch(tmp_path):
    f, b = make_field()
    p = tmp_path / "a.glc"
    write_snapshot(p, f, b)
    blob = p.read_bytes()
    p.write_bytes(blob[:-8])  # truncate one float
    with pytest.raises(SnapshotError, match="payload length mismatch"):
        read_snapshot(p)
    p.write_bytes(blob + b"\x00" * 4)
    with pytest.raises(SnapshotError, match="payload length mismatch"):
        read_snapshot(p)


def test_bad_magic_and_header(tmp_path):
    p = tmp_path / "a.glc"
    p.write_bytes(b"NOTGLC1{}\n")
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(p)
    p.write_bytes(MAGIC + b"{not json}\n")
    with pytest.raises(SnapshotError, match="header"):
        read_snapshot(p)
    p.write_bytes(MAGIC + b'{"version": 1}\n')
    with pytest.raises(SnapshotError, match="missing key"):
        read_snapshot(p)

"""Bit-exact field snapshot format.

Layout: the ASCII magic "GLCELL1" followed by a one-line JSON header and a
single newline, then the raw payload: 2 * n^2 little-endian float64 values,
interleaved re/im, row-major from (i=0, j=0) with i fastest.  The payload is
exactly 16 * n^2 bytes; readers reject any other length.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass

import numpy as np

from .energy import DiscreteField
from .grid import CellConfig, WrapRule, build_grid

MAGIC = b"GLCELL1"


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class SnapshotHeader:
    version: int
    R: float
    n: int
    b: float
    N: int
    layout: str = "row-major"
    dtype: str = "f64le"
    created: str = ""

    def to_json(self) -> str:
        return json.dumps({
            "version": self.version,
            "R": self.R,
            "n": self.n,
            "b": self.b,
            "N": self.N,
            "layout": self.layout,
            "dtype": self.dtype,
            "channels": ["re", "im"],
            "created": self.created,
        })


def _payload(u: np.ndarray) -> bytes:
    # i fastest: column-major ravel of u[i, j]; complex128 memory is already
    # adjacent little-endian (re, im) float64 pairs
    flat = np.ravel(np.ascontiguousarray(u, dtype=np.complex128), order="F")
    return flat.astype("<c16").tobytes()


def write_snapshot(path, field: DiscreteField, b: float) -> None:
    g = field.grid
    header = SnapshotHeader(
        version=1, R=g.R, n=g.n, b=b, N=g.N,
        created=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header.to_json().encode("ascii"))
        fh.write(b"\n")
        fh.write(_payload(field.u))


def read_snapshot(path) -> tuple[DiscreteField, float]:
    """Read a snapshot; returns (field, b)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MAGIC):
        raise SnapshotError("bad magic: not a GLCELL1 snapshot")
    nl = blob.find(b"\n")
    if nl < 0:
        raise SnapshotError("missing header terminator")
    try:
        meta = json.loads(blob[len(MAGIC):nl].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"bad header JSON: {exc}") from exc
    for key in ("version", "R", "n", "b", "N"):
        if key not in meta:
            raise SnapshotError(f"header missing key {key!r}")
    n = int(meta["n"])
    payload = blob[nl + 1:]
    if len(payload) != 16 * n * n:
        raise SnapshotError(
            f"payload length mismatch: got {len(payload)}, want {16 * n * n}"
        )
    flat = np.frombuffer(payload, dtype="<c16")
    u = np.reshape(flat, (n, n), order="F").copy()
    config = CellConfig(b=float(meta["b"]), N=int(meta["N"]), n=n)
    grid = build_grid(config)
    field = DiscreteField(u=u, grid=grid, wrap=WrapRule(n=n, N=grid.N))
    return field, float(meta["b"])

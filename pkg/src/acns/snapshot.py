"""Field snapshot binary format.

Layout (little-endian):
    magic   4 bytes  b"ACNS"
    version u16      format version, currently 1
    dim     u16      spatial dimension
    n       u32      points per axis
    count   u32      number of scalar components
    data    count * n^dim float64, row-major, physical values
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"ACNS"
VERSION = 1
_HEADER = struct.Struct("<4sHHII")


class SnapshotError(IOError):
    """Raised for malformed, truncated, or mismatched snapshot files."""


def write_snapshot(path, components) -> None:
    """Write a list of equal-shape real arrays as one snapshot file."""
    components = [np.ascontiguousarray(c, dtype="<f8") for c in components]
    shape = components[0].shape
    n = shape[0]
    dim = len(shape)
    for c in components:
        if c.shape != shape:
            raise ValueError("all snapshot components must share one shape")
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dim, n, len(components)))
        for c in components:
            fh.write(c.tobytes())
    tmp.replace(path)  # atomic-ish: a killed writer never leaves a short file


def read_snapshot(path):
    """Read a snapshot, returning (dim, n, [arrays])."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, dim, n, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported version {version}")
    per = n**dim
    expected = _HEADER.size + 8 * per * count
    if len(raw) != expected:
        raise SnapshotError(
            f"{path}: expected {expected} bytes for dim={dim} n={n} "
            f"count={count}, found {len(raw)}"
        )
    out = []
    offset = _HEADER.size
    shape = (n,) * dim
    for _ in range(count):
        arr = np.frombuffer(raw, dtype="<f8", count=per, offset=offset)
        out.append(arr.reshape(shape).copy())
        offset += 8 * per
    return dim, n, out

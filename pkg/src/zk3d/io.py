"""Binary snapshots and CSV output.

Snapshot layout (little-endian throughout)::

    4s   magic  b"ZK3D"
    u32  version (1)
    3u64 n_x n_y n_z
    3f64 l_x l_y l_z
    f64  time
    f64  v_x
    ...  n_x*n_y*n_z f64 values, x index fastest
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SnapshotFormatError
from .spectral import RealField, make_grid

MAGIC = b"ZK3D"
VERSION = 1
_HEADER = struct.Struct("<4sI3Q3d2d")


@dataclass
class Snapshot:
    field: RealField
    time: float
    v_x: float


def encode_snapshot(u: RealField, time: float = 0.0, v_x: float = 0.0) -> bytes:
    g = u.grid
    head = _HEADER.pack(MAGIC, VERSION, *g.n, *g.l, float(time), float(v_x))
    payload = np.asarray(u.values, dtype="<f8").tobytes(order="F")
    return head + payload


def decode_snapshot(data: bytes) -> Snapshot:
    if len(data) < _HEADER.size:
        raise SnapshotFormatError(f"truncated header ({len(data)} of {_HEADER.size} bytes)")
    magic, version, nx, ny, nz, lx, ly, lz, time, v_x = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    want = 8 * nx * ny * nz
    have = len(data) - _HEADER.size
    if have != want:
        raise SnapshotFormatError(
            f"payload is {have} bytes but the header promises {want} ({nx}x{ny}x{nz})")
    try:
        grid = make_grid((nx, ny, nz), (lx, ly, lz))
    except ValueError as err:
        raise SnapshotFormatError(f"invalid grid in header: {err}") from None
    vals = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape((nx, ny, nz), order="F")
    return Snapshot(RealField(grid, vals.astype(np.float64)), time, v_x)


def write_snapshot(path, u: RealField, time: float = 0.0, v_x: float = 0.0) -> None:
    Path(path).write_bytes(encode_snapshot(u, time, v_x))


def read_snapshot(path) -> Snapshot:
    return decode_snapshot(Path(path).read_bytes())


def fmt(x) -> str:
    return "%.17g" % x


TIMESERIES_COLUMNS = (
    "t", "linf", "argmax_x", "argmax_y", "argmax_z", "mass", "energy",
    "mass_drift", "energy_drift", "cone_inside", "cone_outside",
)


def write_timeseries(path, series) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(TIMESERIES_COLUMNS)
        for r in series:
            w.writerow([fmt(v) for v in (
                r.t, r.linf, *r.argmax, r.mass, r.energy, r.mass_drift,
                r.energy_drift, r.cone_inside_l2, r.cone_outside_l2)])


def read_timeseries(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    head, body = rows[0], rows[1:]
    cols = np.array(body, dtype=float).reshape(len(body), len(head))
    return {h: cols[:, i] for i, h in enumerate(head)}


def write_spectral_decay(path, reports) -> None:
    """``reports`` is a sequence of (t, SpectralDecay)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        nb = len(reports[0][1].band_max) if reports else 0
        w.writerow(["t", "peak"] + [f"band_{b}" for b in range(nb)])
        for t, rep in reports:
            w.writerow([fmt(t), fmt(rep.peak)] + [fmt(v) for v in rep.band_max])

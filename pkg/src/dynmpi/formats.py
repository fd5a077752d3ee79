"""Binary array files and CSV exports.

Binary layout (all little-endian, offsets in bytes)::

    0   8  magic            b"DMPIARR\\0"
    8   2  version          uint16, currently 1
    10  1  kind             uint8: 1 system pair, 2 signal, 3 spline coefficients
    11  1  domain           uint8: 0 time, 1 frequency
    12  4  n_rows           uint32
    16  4  n_cols           uint32
    20  4  n_blocks         uint32
    24  4  n_frames         uint32
    28  8  cycle_time       float64 (s)
    36  8  scale            float64 (eta for system pairs, 0 otherwise)
    44 12  grid shape       3 x uint32
    56 24  voxel size       3 x float64 (m)
    80 16  grid hash        ASCII hex, see Grid.digest
    96  2  channel bytes    uint16 length L
    98  L  channels         ASCII, comma separated
    98+L   payload          n_blocks blocks of n_rows x n_cols, row-major,
                            float64; complex entries as interleaved re, im

Block order per kind:

* system pair: S1 per channel, then S2 per channel; blocks are (n_T, R).
* signal: one block (channels, n samples).
* spline coefficients: one block (M, R); knots are the clamped uniform
  vector over ``n_frames * cycle_time`` with ``M - 3`` intervals.

Every writer goes through a temporary file in the target directory and an
atomic rename, so failed runs leave no partial output.
"""

from __future__ import annotations

import contextlib
import csv
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .forward import Signal
from .grid import Grid
from .phantom import SplineConcentration, clamped_knots
from .system import SystemMatrixPair

MAGIC = b"DMPIARR\0"
VERSION = 1
KIND_SYSTEM, KIND_SIGNAL, KIND_SPLINE = 1, 2, 3
DOMAINS = ("time", "frequency")
_HEADER = struct.Struct("<8sHBBIIIIdd3I3d16sH")


class FormatError(ValueError):
    """Malformed or incompatible data file."""


@dataclass(frozen=True, eq=False)
class ArrayFile:
    kind: int
    domain: str
    blocks: np.ndarray  # (n_blocks, n_rows, n_cols)
    n_frames: int
    cycle_time: float
    scale: float
    grid: Grid
    grid_hash: str
    channels: tuple


@contextlib.contextmanager
def atomic_open(path, mode: str = "wb"):
    """Open a temp file next to ``path``; rename over it on success only."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    umask = os.umask(0)
    os.umask(umask)
    try:
        os.chmod(tmp, 0o666 & ~umask)
        with os.fdopen(fd, mode, **({} if "b" in mode else {"newline": ""})) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_array_file(path, kind: int, blocks, grid: Grid, channels, domain="time", n_frames=1, scale=0.0):
    blocks = np.asarray(blocks)
    if blocks.ndim != 3:
        raise ValueError("blocks must be a (n_blocks, rows, cols) array")
    is_complex = np.iscomplexobj(blocks)
    if (domain == "frequency") != is_complex:
        raise ValueError("frequency-domain payloads are complex, time-domain payloads real")
    chan = ",".join(channels).encode("ascii")
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        kind,
        DOMAINS.index(domain),
        blocks.shape[1],
        blocks.shape[2],
        blocks.shape[0],
        n_frames,
        grid.cycle_time,
        scale,
        *grid.shape,
        *grid.voxel_size,
        grid.digest().encode("ascii"),
        len(chan),
    )
    payload = np.ascontiguousarray(blocks, dtype="<c16" if is_complex else "<f8")
    with atomic_open(path) as fh:
        fh.write(header)
        fh.write(chan)
        fh.write(payload.tobytes())


def read_array_file(path) -> ArrayFile:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size or data[:8] != MAGIC:
        raise FormatError(f"{path}: not a dynmpi array file")
    (_, version, kind, dom, rows, cols, nb, frames, tc, scale, sx, sy, sz, vx, vy, vz, ghash, clen) = _HEADER.unpack_from(data)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dom > 1:
        raise FormatError(f"{path}: unknown domain tag {dom}")
    start = _HEADER.size + clen
    channels = tuple(c for c in data[_HEADER.size:start].decode("ascii").split(",") if c)
    dtype = "<c16" if dom == 1 else "<f8"
    count = nb * rows * cols
    expected = start + count * np.dtype(dtype).itemsize
    if len(data) != expected:
        raise FormatError(f"{path}: payload size {len(data) - start} bytes, expected {expected - start}")
    blocks = np.frombuffer(data, dtype=dtype, count=count, offset=start).reshape(nb, rows, cols).astype(
        complex if dom == 1 else float
    )
    grid = Grid((sx, sy, sz), (vx, vy, vz), 2, max(frames, 1), tc)
    return ArrayFile(kind, DOMAINS[dom], blocks, frames, tc, scale, grid, ghash.decode("ascii"), channels)


def _expect(f: ArrayFile, kind: int, path):
    if f.kind != kind:
        raise FormatError(f"{path}: file kind {f.kind}, expected {kind}")


def write_system_pair(path, S: SystemMatrixPair):
    blocks = np.concatenate([S.s1, S.s2], axis=0)
    write_array_file(path, KIND_SYSTEM, blocks, S.grid, S.channels, S.domain, S.grid.n_frames, S.eta)


def read_system_pair(path) -> SystemMatrixPair:
    f = read_array_file(path)
    _expect(f, KIND_SYSTEM, path)
    n_ch = len(f.channels)
    if f.blocks.shape[0] != 2 * n_ch:
        raise FormatError(f"{path}: {f.blocks.shape[0]} blocks for {n_ch} channels")
    g = f.grid
    grid = Grid(g.shape, g.voxel_size, f.blocks.shape[1], g.n_frames, g.cycle_time)
    if grid.digest() != f.grid_hash:
        raise FormatError(f"{path}: grid hash mismatch")
    return SystemMatrixPair(f.blocks[:n_ch], f.blocks[n_ch:], f.channels, f.scale, grid, f.domain)


def write_signal(path, u: Signal, grid: Grid):
    if grid.n_samples != u.n_samples:
        raise ValueError("grid and signal sampling differ")
    write_array_file(path, KIND_SIGNAL, u.data[None], grid, u.channels, u.domain, u.n_frames)


def read_signal(path) -> tuple[Signal, Grid, str]:
    """Signal, the grid recorded in the header, and the stored grid hash."""
    f = read_array_file(path)
    _expect(f, KIND_SIGNAL, path)
    data = f.blocks[0]
    n_samples = data.shape[1] // max(f.n_frames, 1)
    g = f.grid
    grid = Grid(g.shape, g.voxel_size, n_samples, f.n_frames, f.cycle_time)
    if grid.digest() != f.grid_hash:
        raise FormatError(f"{path}: grid hash mismatch")
    return Signal(data, f.channels, n_samples, f.n_frames, f.cycle_time, f.domain), grid, f.grid_hash


def write_spline(path, sc: SplineConcentration, grid: Grid):
    knots = clamped_knots(sc.span[1], sc.n_coefficients - sc.degree)
    if not np.allclose(knots, sc.knots, rtol=0, atol=1e-15 * sc.span[1]) or sc.span[0] != 0:
        raise ValueError("only clamped uniform splines starting at 0 can be stored")
    n_frames = int(round(sc.span[1] / grid.cycle_time))
    write_array_file(path, KIND_SPLINE, sc.coefficients[None], grid, (), "time", n_frames)


def read_spline(path) -> tuple[SplineConcentration, str]:
    """Spline and the grid hash stored with it."""
    f = read_array_file(path)
    _expect(f, KIND_SPLINE, path)
    coef = f.blocks[0]
    knots = clamped_knots(f.n_frames * f.cycle_time, coef.shape[0] - 3)
    return SplineConcentration(coef, knots), f.grid_hash


def fmt(x) -> str:
    """Full double precision text (17 significant digits)."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    """Write rows of numbers (or strings) with 17 significant digits."""
    with atomic_open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)) for v in row])


def read_csv(path):
    """Header and float array of a numeric CSV written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def write_key_values(path, items: dict):
    """``key = value`` lines; floats in full precision, None as ``none``."""
    lines = []
    for k, v in items.items():
        if v is None:
            s = "none"
        elif isinstance(v, (bool, str, int, np.integer)):
            s = str(v)
        else:
            s = fmt(v)
        lines.append(f"{k} = {s}\n")
    with atomic_open(path, "w") as fh:
        fh.writelines(lines)

"""Binary field snapshots with JSON sidecars, and atomic file writes.

A snapshot ``name`` is stored as ``name.bin`` (little-endian float64,
x index varying fastest, complex values interleaved as re, im) next to
``name.json`` holding ``{nx, ny, lx, ly, kind, name, time}``.  1D fields
are written with ``ny = 1``.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatch
from .spectral import Grid1D, Grid2D


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


@dataclass(frozen=True)
class Snapshot:
    """A named field sample at a given time."""

    values: np.ndarray
    grid: Grid2D | Grid1D
    name: str = "field"
    time: float = 0.0

    @property
    def kind(self):
        return "complex" if np.iscomplexobj(self.values) else "real"


def _grid_meta(grid):
    if isinstance(grid, Grid1D):
        return {"nx": grid.n, "ny": 1, "lx": grid.l, "ly": 0.0}
    return {"nx": grid.nx, "ny": grid.ny, "lx": grid.lx, "ly": grid.ly}


def grid_from_meta(meta):
    if int(meta["ny"]) == 1:
        return Grid1D(int(meta["nx"]), float(meta["lx"]))
    return Grid2D(int(meta["nx"]), int(meta["ny"]), float(meta["lx"]), float(meta["ly"]))


def write_snapshot(directory, snap):
    """Write ``snap`` into ``directory``; returns the path of the ``.bin`` file."""
    directory = Path(directory)
    values = np.asarray(snap.values)
    snap.grid.check(values)
    if values.ndim != (1 if isinstance(snap.grid, Grid1D) else 2):
        raise GridMismatch("snapshots hold a single scalar field")
    flat = values.flatten(order="F")
    if np.iscomplexobj(flat):
        flat = np.column_stack([flat.real, flat.imag]).ravel()
    binpath = directory / f"{snap.name}.bin"
    atomic_write_bytes(binpath, flat.astype("<f8").tobytes())
    meta = dict(_grid_meta(snap.grid), kind=snap.kind, name=snap.name, time=float(snap.time))
    write_json(directory / f"{snap.name}.json", meta)
    return binpath


def read_snapshot(path):
    """Read a snapshot given either its ``.bin`` or ``.json`` path."""
    path = Path(path)
    stem = path.with_suffix("")
    meta = json.loads(stem.with_suffix(".json").read_text())
    raw = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype="<f8").astype(float)
    nx, ny = int(meta["nx"]), int(meta["ny"])
    if meta["kind"] == "complex":
        raw = raw[0::2] + 1j * raw[1::2]
    if raw.size != nx * ny:
        raise GridMismatch(f"{path}: expected {nx * ny} values, found {raw.size}")
    values = raw.reshape((nx, ny), order="F")
    grid = grid_from_meta(meta)
    if isinstance(grid, Grid1D):
        values = values[:, 0]
    return Snapshot(values, grid, meta.get("name", stem.name), float(meta.get("time", 0.0)))


def write_matrix_field(directory, name, M, grid, time=0.0):
    """Write a ``(..., 3, 3)`` field as nine scalar snapshots ``name_ij`` (one-based)."""
    M = np.asarray(M)
    if M.shape[-2:] != (3, 3):
        raise GridMismatch(f"expected a 3x3 matrix field, got trailing shape {M.shape[-2:]}")
    return [
        write_snapshot(directory, Snapshot(M[..., i, j], grid, f"{name}_{i + 1}{j + 1}", time))
        for i in range(3)
        for j in range(3)
    ]


def read_matrix_field(directory, name):
    """Inverse of :func:`write_matrix_field`; returns ``(M, grid, time)``."""
    directory = Path(directory)
    snaps = [[read_snapshot(directory / f"{name}_{i + 1}{j + 1}.bin") for j in range(3)] for i in range(3)]
    grids = {s.grid for row in snaps for s in row}
    if len(grids) != 1:
        raise GridMismatch(f"components of {name} live on different grids")
    M = np.stack([np.stack([s.values for s in row], axis=-1) for row in snaps], axis=-2)
    return M, snaps[0][0].grid, snaps[0][0].time

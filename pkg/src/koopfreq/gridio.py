"""Gridded dataset container and its two-file interchange format.

A gridded dataset is a JSON header {nx, ny, nt, dt, layout: "t-major"} next
to a raw little-endian float64 binary of nx*ny*nt values in [t][iy][ix]
order.  The binary lives at the header path with its .json suffix replaced
by .bin, so either file name identifies the pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError

__all__ = ["GridData", "read_grid", "write_grid", "grid_binary_path"]

_LAYOUT = "t-major"


@dataclass(frozen=True, eq=False)
class GridData:
    """In-memory gridded dataset, values indexed [t, iy, ix]."""

    values: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 3:
            raise InvalidInputError(f"grid values must be 3-d [t, iy, ix], got shape {arr.shape}")
        if not (self.dt > 0):
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "values", arr)

    @property
    def nt(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def nx(self) -> int:
        return self.values.shape[2]

    def cell(self, ix: int, iy: int) -> np.ndarray:
        return self.values[:, iy, ix]


def grid_binary_path(header_path: str | Path) -> Path:
    path = Path(header_path)
    if path.suffix == ".json":
        return path.with_suffix(".bin")
    return path.with_name(path.name + ".bin")


def write_grid(grid: GridData, header_path: str | Path) -> Path:
    """Write header JSON + raw binary; returns the binary path."""
    header_path = Path(header_path)
    header = {
        "nx": grid.nx,
        "ny": grid.ny,
        "nt": grid.nt,
        "dt": grid.dt,
        "layout": _LAYOUT,
    }
    header_path.write_text(json.dumps(header, sort_keys=True, indent=2) + "\n")
    binary_path = grid_binary_path(header_path)
    binary_path.write_bytes(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())
    return binary_path


def read_grid(header_path: str | Path) -> GridData:
    """Read the header + binary pair, naming the offending header field on errors."""
    header_path = Path(header_path)
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{header_path}: invalid JSON header: {exc}") from None
    if not isinstance(header, dict):
        raise ParseError(f"{header_path}: header must be a JSON object")
    for name in ("nx", "ny", "nt"):
        v = header.get(name)
        if not isinstance(v, int) or v < 1:
            raise ParseError(f"{header_path}: header field {name!r} must be a positive integer, got {v!r}")
    dt = header.get("dt")
    if not isinstance(dt, (int, float)) or not dt > 0:
        raise ParseError(f"{header_path}: header field 'dt' must be a positive number, got {dt!r}")
    if header.get("layout") != _LAYOUT:
        raise ParseError(
            f"{header_path}: header field 'layout' must be {_LAYOUT!r}, got {header.get('layout')!r}"
        )
    nx, ny, nt = header["nx"], header["ny"], header["nt"]
    binary_path = grid_binary_path(header_path)
    if not binary_path.exists():
        raise ParseError(f"{binary_path}: grid binary not found")
    raw = np.fromfile(binary_path, dtype="<f8")
    if raw.size != nx * ny * nt:
        raise ParseError(
            f"{binary_path}: expected {nx * ny * nt} float64 values, found {raw.size}"
        )
    return GridData(values=raw.reshape(nt, ny, nx), dt=float(dt))

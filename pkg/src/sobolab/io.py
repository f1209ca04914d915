"""Reading and writing grid functions.

Two formats are supported:

* JSON: ``{"grid": {"n", "G", "L"}, "values": [...]}`` with values flattened
  row-major.  Weight fields add ``"weight": true``.
* Binary: a 32-byte header (magic ``SBLB``, version, n, G, L, 8 reserved
  bytes) followed by little-endian float64 samples, row-major.
"""
from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .spectral import Grid, GridFunction

MAGIC = b"SBLB"
VERSION = 1
_HEADER = struct.Struct("<4sIIId8x")
assert _HEADER.size == 32


class FormatError(ValueError):
    """Malformed serialized input."""


def _float_repr(x: float):
    return float(x) if math.isfinite(x) else None


def to_dict(f: GridFunction, weight: bool = False) -> dict:
    out = {"grid": f.grid.to_dict(), "values": [float(v) for v in f.flat]}
    if weight:
        out["weight"] = True
    return out


def grid_from_dict(d: dict) -> Grid:
    try:
        return Grid(int(d["n"]), int(d["G"]), float(d["L"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad grid record: {exc}") from None


def from_dict(d: dict) -> GridFunction:
    if not isinstance(d, dict) or "grid" not in d or "values" not in d:
        raise FormatError("grid function record needs 'grid' and 'values'")
    grid = grid_from_dict(d["grid"])
    vals = d["values"]
    if any(v is None for v in vals):
        raise FormatError("null sample in grid function")
    try:
        arr = np.asarray(vals, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad samples: {exc}") from None
    if arr.ndim != 1 or arr.size != grid.size:
        raise FormatError(f"expected {grid.size} flat samples, got shape {arr.shape}")
    return GridFunction(grid, arr)


def to_json(f: GridFunction, weight: bool = False) -> str:
    return json.dumps(to_dict(f, weight))


def from_json(text: str) -> GridFunction:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return from_dict(d)


def to_bytes(f: GridFunction) -> bytes:
    g = f.grid
    head = _HEADER.pack(MAGIC, VERSION, g.n, g.G, g.L)
    return head + np.ascontiguousarray(f.flat, dtype="<f8").tobytes()


def from_bytes(blob: bytes) -> GridFunction:
    if len(blob) < _HEADER.size:
        raise FormatError("binary blob shorter than header")
    magic, version, n, G, L = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    try:
        grid = Grid(n, G, L)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    body = blob[_HEADER.size:]
    if len(body) != 8 * grid.size:
        raise FormatError(f"expected {8 * grid.size} payload bytes, got {len(body)}")
    return GridFunction(grid, np.frombuffer(body, dtype="<f8"))


def save(f: GridFunction, path: str | Path, weight: bool = False) -> None:
    """Write ``f``; ``.json`` selects JSON, anything else the binary format."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(to_json(f, weight))
    else:
        path.write_bytes(to_bytes(f))


def load(path: str | Path) -> GridFunction:
    path = Path(path)
    data = path.read_bytes()
    if data[:4] == MAGIC:
        return from_bytes(data)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: neither binary grid function nor JSON") from None
    return from_json(text)

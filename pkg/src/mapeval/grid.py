"""Occupancy grid model and PGM (P2/P5) reading and writing.

A grid stores occupancy probabilities in a float64 array of shape
``(height, width)``; unknown cells hold NaN. Raw PGM gray values map to
probabilities by ``p = 1 - v / maxval``, with a single sentinel gray value
reserved for unknown space (205 by default, as in ROS ``map_saver`` output).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

__all__ = [
    "OccupancyGrid",
    "PgmConvention",
    "PgmError",
    "PgmFormatError",
    "PgmTruncatedError",
    "PgmRangeError",
    "CornerRemap",
    "EnclosedRemap",
    "parse_pgm",
    "write_pgm",
    "read_pgm",
    "save_pgm",
    "to_intensity",
]


class PgmError(ValueError):
    """Base class for PGM decoding errors."""


class PgmFormatError(PgmError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class PgmTruncatedError(PgmError):
    pass


class PgmRangeError(PgmError):
    pass


@dataclass(frozen=True)
class PgmConvention:
    """Gray-value semantics of a map image.

    ``maxval`` is used when writing; when parsing, the file's own maxval
    defines the probability scale and ``unknown_gray`` is compared against
    the raw values.
    """

    unknown_gray: int = 205
    maxval: int = 255

    def __post_init__(self):
        if not 1 <= self.maxval <= 65535:
            raise PgmRangeError(f"maxval must be in [1, 65535], got {self.maxval}")
        if not 0 <= self.unknown_gray <= self.maxval:
            raise ValueError(
                f"unknown_gray must be in [0, {self.maxval}], got {self.unknown_gray}"
            )


DEFAULT_CONVENTION = PgmConvention()


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """2D occupancy grid; ``occupancy[row, col]`` is a probability or NaN (unknown).

    Row 0 is the first row of the PGM raster. ``resolution`` (meters per cell)
    is carried along as metadata only.
    """

    occupancy: np.ndarray
    resolution: Optional[float] = None

    def __post_init__(self):
        occ = np.array(self.occupancy, dtype=np.float64, copy=True)
        if occ.ndim != 2:
            raise ValueError(f"occupancy must be 2D, got shape {occ.shape}")
        if occ.shape[0] < 1 or occ.shape[1] < 1:
            raise ValueError("grid must have at least one row and one column")
        known = occ[~np.isnan(occ)]
        if known.size and (known.min() < 0.0 or known.max() > 1.0):
            raise ValueError("occupancy probabilities must lie in [0, 1]")
        if np.isinf(occ).any():
            raise ValueError("occupancy probabilities must be finite")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @classmethod
    def from_cells(
        cls,
        cells: Iterable[Optional[float]],
        width: int,
        height: int,
        resolution: Optional[float] = None,
    ) -> "OccupancyGrid":
        """Build a grid from row-major cell states; ``None`` marks an unknown cell."""
        values = [math.nan if c is None else float(c) for c in cells]
        if len(values) != width * height:
            raise ValueError(
                f"expected {width * height} cells for {width}x{height}, got {len(values)}"
            )
        return cls(np.array(values, dtype=np.float64).reshape(height, width), resolution)

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.occupancy.shape

    @property
    def unknown_mask(self) -> np.ndarray:
        return np.isnan(self.occupancy)

    @property
    def known_mask(self) -> np.ndarray:
        return ~np.isnan(self.occupancy)

    def cells(self) -> list[Optional[float]]:
        """Row-major cell states, ``None`` for unknown."""
        return [None if math.isnan(v) else v for v in self.occupancy.ravel().tolist()]

    def transpose(self) -> "OccupancyGrid":
        return OccupancyGrid(self.occupancy.T, self.resolution)

    def rot90(self, k: int = 1) -> "OccupancyGrid":
        return OccupancyGrid(np.rot90(self.occupancy, k), self.resolution)

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.resolution == other.resolution
            and bool(np.array_equal(self.occupancy, other.occupancy, equal_nan=True))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        n_unknown = int(self.unknown_mask.sum())
        return (
            f"OccupancyGrid(width={self.width}, height={self.height}, "
            f"unknown={n_unknown}, resolution={self.resolution})"
        )


# --------------------------------------------------------------------------
# PGM parsing

_WS = b" \t\n\r\x0b\x0c"


class _HeaderReader:
    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def skip_ws_and_comments(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos]
            if c in _WS:
                self.pos += 1
            elif c == ord("#"):
                while self.pos < n and data[self.pos] not in b"\n\r":
                    self.pos += 1
            else:
                break

    def integer(self, what: str) -> int:
        self.skip_ws_and_comments()
        start = self.pos
        if start >= len(self.data):
            raise PgmFormatError(f"unexpected end of header while reading {what}", start)
        while self.pos < len(self.data) and chr(self.data[self.pos]).isdigit():
            self.pos += 1
        if self.pos == start:
            raise PgmFormatError(f"expected decimal integer for {what}", start)
        nxt = self.pos
        if nxt < len(self.data) and self.data[nxt] not in _WS and self.data[nxt] != ord("#"):
            raise PgmFormatError(f"malformed {what}", nxt)
        return int(self.data[start:self.pos])


def _decode_raster(data: bytes):
    if len(data) < 2 or data[:1] != b"P":
        raise PgmFormatError("not a PGM file: missing 'P' magic", 0)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmFormatError(f"unsupported magic {magic.decode('latin-1')!r}, expected P2 or P5", 0)
    if len(data) > 2 and data[2] not in _WS and data[2] != ord("#"):
        raise PgmFormatError("magic must be followed by whitespace", 2)

    hdr = _HeaderReader(data, 2)
    width = hdr.integer("width")
    height = hdr.integer("height")
    maxval_pos = hdr.pos
    maxval = hdr.integer("maxval")
    if width < 1 or height < 1:
        raise PgmFormatError(f"invalid dimensions {width}x{height}", maxval_pos)
    if not 1 <= maxval <= 65535:
        raise PgmRangeError(f"maxval {maxval} outside [1, 65535]")
    count = width * height

    if magic == b"P5":
        if hdr.pos >= len(data) or data[hdr.pos] not in _WS:
            raise PgmFormatError("expected single whitespace after maxval", hdr.pos)
        start = hdr.pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(data) - start < need:
            raise PgmTruncatedError(
                f"raster truncated: expected {need} bytes, found {len(data) - start}"
            )
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=start).astype(np.int64)
    else:
        body = data[hdr.pos:]
        body = re.sub(rb"#[^\n\r]*", b" ", body)
        tokens = body.split()
        if len(tokens) < count:
            raise PgmTruncatedError(
                f"raster truncated: expected {count} samples, found {len(tokens)}"
            )
        try:
            raw = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError as exc:
            raise PgmFormatError(f"non-numeric sample in ASCII raster: {exc}", hdr.pos) from None
    if raw.size and raw.max() > maxval:
        raise PgmRangeError(f"sample value {int(raw.max())} exceeds maxval {maxval}")
    return raw.reshape(height, width), maxval


def parse_pgm(data: bytes, convention: PgmConvention = DEFAULT_CONVENTION) -> OccupancyGrid:
    """Decode a P2 or P5 PGM image into an :class:`OccupancyGrid`.

    Raises
    ------
    PgmFormatError
        Bad magic or malformed header; the message names the byte offset.
    PgmTruncatedError
        Fewer samples than ``width * height``.
    PgmRangeError
        maxval outside [1, 65535] or a sample exceeding maxval.
    """
    raw, maxval = _decode_raster(bytes(data))
    occ = 1.0 - raw.astype(np.float64) / maxval
    occ[raw == convention.unknown_gray] = np.nan
    return OccupancyGrid(occ)


def _quantize(grid: OccupancyGrid, convention: PgmConvention) -> np.ndarray:
    maxval = convention.maxval
    occ = grid.occupancy
    unknown = np.isnan(occ)
    levels = np.rint(maxval * (1.0 - np.where(unknown, 0.0, occ))).astype(np.int64)
    # A known value landing on the sentinel moves one level toward its true value.
    clash = ~unknown & (levels == convention.unknown_gray)
    if clash.any():
        exact = maxval * (1.0 - occ[clash])
        step = np.where(exact >= convention.unknown_gray, 1, -1)
        moved = convention.unknown_gray + step
        moved = np.where((moved < 0) | (moved > maxval), convention.unknown_gray - step, moved)
        levels[clash] = moved
    levels[unknown] = convention.unknown_gray
    return levels


def write_pgm(grid: OccupancyGrid, convention: PgmConvention = DEFAULT_CONVENTION) -> bytes:
    """Encode a grid as binary P5; 16-bit big-endian samples when maxval > 255."""
    levels = _quantize(grid, convention)
    header = f"P5\n{grid.width} {grid.height}\n{convention.maxval}\n".encode("ascii")
    dtype = ">u2" if convention.maxval > 255 else "u1"
    return header + levels.astype(dtype).tobytes()


def read_pgm(path, convention: PgmConvention = DEFAULT_CONVENTION) -> OccupancyGrid:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read(), convention)


def save_pgm(path, grid: OccupancyGrid, convention: PgmConvention = DEFAULT_CONVENTION) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(grid, convention))


# --------------------------------------------------------------------------
# Remapping to intensity images


@dataclass(frozen=True)
class CornerRemap:
    """Known(p) -> 1 - p, Unknown -> 0: free space bright, walls and unknown dark."""


@dataclass(frozen=True)
class EnclosedRemap:
    """Known(p) -> p, Unknown -> ``unknown_value``."""

    unknown_value: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.unknown_value <= 1.0 or math.isnan(self.unknown_value):
            raise ValueError(f"unknown_value must lie in [0, 1], got {self.unknown_value}")


RemapRule = Union[CornerRemap, EnclosedRemap]


def to_intensity(grid: OccupancyGrid, rule: RemapRule) -> np.ndarray:
    """Pointwise remap of a grid to a float64 intensity image with values in [0, 1]."""
    occ = grid.occupancy
    unknown = np.isnan(occ)
    if isinstance(rule, CornerRemap):
        return np.where(unknown, 0.0, 1.0 - occ)
    if isinstance(rule, EnclosedRemap):
        return np.where(unknown, float(rule.unknown_value), occ)
    raise TypeError(f"unsupported remap rule {rule!r}")

"""Synthetic occupancy grids with known geometry, for tests, demos and benchmarks."""
from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import OccupancyGrid

Room = tuple[int, int, int, int]  # (top, left, bottom, right) wall rows/cols, inclusive


def rooms_grid(
    height: int,
    width: int,
    rooms: Sequence[Room],
    dots: Iterable[tuple[int, int]] = (),
    unknown_cells: Iterable[tuple[int, int]] = (),
    wall: float = 1.0,
    free: float = 0.0,
    resolution: Optional[float] = None,
) -> OccupancyGrid:
    """Rectangular rooms with 1-cell walls and free interiors on unknown background.

    Rooms may share walls. ``dots`` become occupied cells and ``unknown_cells``
    are painted unknown last (e.g. to open a wall).
    """
    occ = np.full((height, width), np.nan)
    for top, left, bottom, right in rooms:
        occ[top:bottom + 1, left:right + 1] = free
    for top, left, bottom, right in rooms:
        occ[top, left:right + 1] = wall
        occ[bottom, left:right + 1] = wall
        occ[top:bottom + 1, left] = wall
        occ[top:bottom + 1, right] = wall
    for r, c in dots:
        occ[r, c] = wall
    for r, c in unknown_cells:
        occ[r, c] = np.nan
    return OccupancyGrid(occ, resolution)


def room_vertices(rooms: Sequence[Room]) -> np.ndarray:
    """Distinct wall-corner cells ``(row, col)`` of the given rooms."""
    pts = set()
    for top, left, bottom, right in rooms:
        pts.update({(top, left), (top, right), (bottom, left), (bottom, right)})
    return np.array(sorted(pts), dtype=np.int64).reshape(-1, 2)


def single_room(margin: int = 4, height: int = 24, width: int = 32, dots=()) -> tuple[OccupancyGrid, list[Room]]:
    rooms = [(margin, margin, margin + height - 1, margin + width - 1)]
    grid = rooms_grid(height + 2 * margin, width + 2 * margin, rooms, dots=dots)
    return grid, rooms


def two_rooms(
    margin: int = 4, height: int = 24, widths: tuple[int, int] = (30, 26), dots=(), unknown_cells=()
) -> tuple[OccupancyGrid, list[Room]]:
    """Two rooms side by side sharing one vertical wall."""
    top, left = margin, margin
    mid = left + widths[0] - 1
    right = mid + widths[1] - 1
    bottom = top + height - 1
    rooms = [(top, left, bottom, mid), (top, mid, bottom, right)]
    grid = rooms_grid(bottom + 1 + margin, right + 1 + margin, rooms, dots=dots, unknown_cells=unknown_cells)
    return grid, rooms

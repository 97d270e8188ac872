"""Border following with outer/hole hierarchy (Suzuki & Abe, 1985).

Foreground is treated as 8-connected and background as 4-connected; pixels
outside the image count as background.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .labeling import connected_components


@dataclass(frozen=True, eq=False)
class ContourHierarchy:
    """Borders in discovery (raster) order.

    ``contours[i]`` is an ``(n, 2)`` array of ``(row, col)`` points; the first
    point is where tracing started. ``parent[i]`` is the index of the
    enclosing border or -1 for top-level outer borders.
    """

    contours: list
    is_hole: np.ndarray
    parent: np.ndarray

    def __len__(self):
        return len(self.contours)

    @property
    def hole_count(self) -> int:
        return int(self.is_hole.sum())

    @property
    def outer_count(self) -> int:
        return int((~self.is_hole).sum())

    def holes(self) -> list[int]:
        return [i for i, h in enumerate(self.is_hole) if h]


def trace_contours(img) -> ContourHierarchy:
    fg = np.asarray(img, dtype=bool)
    if fg.ndim != 2:
        raise ValueError(f"expected a 2D binary image, got shape {fg.shape}")
    ys, xs, starts, ends, holes, parents = _kernels.suzuki(fg)
    pts = np.stack([ys, xs], axis=1)
    contours = [pts[s:e] for s, e in zip(starts, ends)]
    return ContourHierarchy(contours, holes.astype(bool), parents.astype(np.int64))


def hole_areas(img, hierarchy: ContourHierarchy) -> np.ndarray:
    """Pixel count of the background region enclosed by each hole border.

    A hole border starts at a pixel whose east neighbour lies in the hole, so
    that neighbour seeds a lookup into the 4-connected background components.
    """
    fg = np.asarray(img, dtype=bool)
    idx = hierarchy.holes()
    if not idx:
        return np.zeros(0, dtype=np.int64)
    bg = connected_components(~fg, connectivity=4)
    areas = np.empty(len(idx), dtype=np.int64)
    for n, i in enumerate(idx):
        row, col = hierarchy.contours[i][0]
        areas[n] = bg.sizes[bg.labels[row, col + 1] - 1]
    return areas

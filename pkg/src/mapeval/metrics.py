"""Ground-truth-free map quality metrics.

Three indicators, all "lower is better" when comparing maps of the same
sequence:

* occupied proportion -- share of cells classified occupied by a mean threshold
  (blurred or doubled walls raise it);
* corner count -- structural corners found by Harris on the LoG-filtered map;
* enclosed-area count -- holes in the occupied/unknown mask, maximised over
  the gray value assigned to unknown space.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .grid import CornerRemap, EnclosedRemap, OccupancyGrid, to_intensity
from .imgproc import (
    binarize,
    connected_components,
    detect_corners,
    harris_response,
    hole_areas,
    laplacian_of_gaussian,
    otsu_threshold,
    trace_contours,
)

__all__ = [
    "CornerParams",
    "EnclosedParams",
    "ProportionParams",
    "MetricParams",
    "ProportionResult",
    "CornerResult",
    "EnclosedResult",
    "MetricReport",
    "occupied_proportion",
    "corner_count",
    "enclosed_area_count",
    "enclosed_count_at",
    "unknown_values",
    "evaluate_map",
]


@dataclass(frozen=True)
class CornerParams:
    log_sigma: float = 2.0
    min_blob_size: int = 8
    harris_k: float = 0.04
    harris_window_sigma: float = 1.0
    rel_threshold: float = 0.01
    nms_radius: int = 2
    blob_connectivity: int = 8

    def __post_init__(self):
        if not self.log_sigma > 0 or not self.harris_window_sigma > 0:
            raise ValueError("sigmas must be positive")
        if self.min_blob_size < 1:
            raise ValueError(f"min_blob_size must be >= 1, got {self.min_blob_size}")
        if not 0 < self.harris_k < 0.25:
            raise ValueError(f"harris_k must lie in (0, 0.25), got {self.harris_k}")
        if not 0 < self.rel_threshold <= 1:
            raise ValueError(f"rel_threshold must lie in (0, 1], got {self.rel_threshold}")
        if self.nms_radius < 1:
            raise ValueError(f"nms_radius must be >= 1, got {self.nms_radius}")
        if self.blob_connectivity not in (4, 8):
            raise ValueError("blob_connectivity must be 4 or 8")


@dataclass(frozen=True)
class EnclosedParams:
    u_steps: int = 16
    min_hole_area: int = 4
    otsu_bins: int = 256

    def __post_init__(self):
        if self.u_steps < 1:
            raise ValueError(f"u_steps must be >= 1, got {self.u_steps}")
        if self.min_hole_area < 1:
            raise ValueError(f"min_hole_area must be >= 1, got {self.min_hole_area}")
        if self.otsu_bins < 2:
            raise ValueError(f"otsu_bins must be >= 2, got {self.otsu_bins}")


@dataclass(frozen=True)
class ProportionParams:
    # "mean": threshold is the mean occupancy of the known cells
    threshold_mode: str = "mean"
    # False: occupied iff p > t.  True: occupied iff p >= t (only p < t is free).
    occupied_at_threshold: bool = False

    def __post_init__(self):
        if self.threshold_mode != "mean":
            raise ValueError(f"unsupported threshold_mode {self.threshold_mode!r}")


@dataclass(frozen=True)
class MetricParams:
    corner: CornerParams = field(default_factory=CornerParams)
    enclosed: EnclosedParams = field(default_factory=EnclosedParams)
    proportion: ProportionParams = field(default_factory=ProportionParams)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricParams":
        """Build params from a (possibly partial) nested dict; unknown keys are rejected."""
        parts = {}
        for name, kind in (
            ("corner", CornerParams),
            ("enclosed", EnclosedParams),
            ("proportion", ProportionParams),
        ):
            sub = dict(data.get(name, {}) or {})
            allowed = set(kind.__dataclass_fields__)
            extra = set(sub) - allowed
            if extra:
                raise ValueError(f"unknown {name} parameter(s): {sorted(extra)}")
            parts[name] = kind(**sub)
        extra = set(data) - {"corner", "enclosed", "proportion"}
        if extra:
            raise ValueError(f"unknown parameter group(s): {sorted(extra)}")
        return cls(**parts)

    def with_overrides(self, corner=None, enclosed=None, proportion=None) -> "MetricParams":
        return MetricParams(
            replace(self.corner, **(corner or {})),
            replace(self.enclosed, **(enclosed or {})),
            replace(self.proportion, **(proportion or {})),
        )


# --------------------------------------------------------------------------
# proportion


@dataclass(frozen=True)
class ProportionResult:
    proportion: float
    threshold: float
    occupied_cells: int
    free_cells: int
    unknown_cells: int
    diagnostic: Optional[str] = None

    @property
    def total_cells(self) -> int:
        return self.occupied_cells + self.free_cells + self.unknown_cells


def occupied_proportion(
    grid: OccupancyGrid, params: ProportionParams = ProportionParams()
) -> ProportionResult:
    """Fraction of all cells that are occupied under a per-map mean threshold.

    The threshold is the mean occupancy of the known cells (exactly rounded
    with ``math.fsum``, so the result does not depend on traversal order).
    The denominator counts occupied, free and unknown cells.
    """
    occ = grid.occupancy
    known = occ[~np.isnan(occ)]
    total = occ.size
    n_unknown = total - known.size
    if known.size == 0:
        return ProportionResult(
            0.0, math.nan, 0, 0, n_unknown, "no known cells: occupied proportion undefined"
        )
    thresh = math.fsum(known.tolist()) / known.size
    if params.occupied_at_threshold:
        n_occ = int(np.count_nonzero(known >= thresh))
    else:
        n_occ = int(np.count_nonzero(known > thresh))
    return ProportionResult(n_occ / total, thresh, n_occ, known.size - n_occ, n_unknown)


# --------------------------------------------------------------------------
# corners


@dataclass(frozen=True)
class CornerResult:
    count: int
    corners: list
    diagnostic: Optional[str] = None


def drop_small_dots(intensity: np.ndarray, min_size: int, connectivity: int = 8) -> np.ndarray:
    """Repaint dark blobs smaller than ``min_size`` pixels with the mean free-space level.

    Dark pixels (intensity < 0.5) are walls, obstacles and unknown space. The
    LoG is linear, so repainting dots before filtering equals subtracting
    their filter response afterwards.
    """
    dark = intensity < 0.5
    comps = connected_components(dark, connectivity)
    if comps.count == 0:
        return intensity
    small = np.concatenate(([False], comps.sizes < min_size))[comps.labels]
    if not small.any():
        return intensity
    bright = intensity[~dark]
    fill = math.fsum(bright.tolist()) / bright.size if bright.size else 1.0
    return np.where(small, fill, intensity)


def corner_count(grid: OccupancyGrid, params: CornerParams = CornerParams()) -> CornerResult:
    """Count structural corners of a map.

    Pipeline: remap (free bright, occupied and unknown dark), drop dark blobs
    under ``min_blob_size`` pixels, Laplacian of Gaussian, Harris response,
    thresholded non-maximum suppression.
    """
    if grid.unknown_mask.all():
        return CornerResult(0, [], "all cells unknown: no structure to detect")
    img = to_intensity(grid, CornerRemap())
    img = drop_small_dots(img, params.min_blob_size, params.blob_connectivity)
    structure = laplacian_of_gaussian(img, params.log_sigma)
    resp = harris_response(structure, params.harris_k, params.harris_window_sigma)
    corners = detect_corners(resp, params.rel_threshold, params.nms_radius)
    return CornerResult(len(corners), corners)


# --------------------------------------------------------------------------
# enclosed areas


@dataclass(frozen=True)
class EnclosedResult:
    count: int
    best_u: float
    per_u: tuple  # ((u, count), ...) in evaluation order, u descending
    degenerate_u: tuple = ()


def unknown_values(u_steps: int) -> list[float]:
    """``u_steps`` values from 1.0 down to ``1 / u_steps`` in equal steps."""
    return [(u_steps - i) / u_steps for i in range(u_steps)]


def enclosed_count_at(
    grid: OccupancyGrid, u: float, params: EnclosedParams = EnclosedParams()
) -> tuple[int, bool]:
    """Enclosed areas with unknown cells painted as occupancy ``u``.

    Returns ``(count, degenerate)``; a constant remapped image cannot be split
    and counts as zero.
    """
    img = to_intensity(grid, EnclosedRemap(u))
    otsu = otsu_threshold(img, params.otsu_bins)
    if otsu.degenerate:
        return 0, True
    mask = binarize(img, otsu.threshold)
    hier = trace_contours(mask)
    areas = hole_areas(mask, hier)
    return int(np.count_nonzero(areas >= params.min_hole_area)), False


def enclosed_area_count(
    grid: OccupancyGrid, params: EnclosedParams = EnclosedParams()
) -> EnclosedResult:
    """Maximum enclosed-area count over the unknown-cell values; ties keep the larger u."""
    per_u = []
    degenerate = []
    for u in unknown_values(params.u_steps):
        count, degen = enclosed_count_at(grid, u, params)
        per_u.append((u, count))
        if degen:
            degenerate.append(u)
    best_u, best = per_u[0]
    for u, count in per_u[1:]:
        if count > best:
            best_u, best = u, count
    return EnclosedResult(best, best_u, tuple(per_u), tuple(degenerate))


# --------------------------------------------------------------------------
# combined report


@dataclass(frozen=True)
class MetricReport:
    occupied_proportion: float
    occupied_cells: int
    free_cells: int
    unknown_cells: int
    proportion_threshold: Optional[float]
    corner_count: int
    enclosed_area_count: int
    enclosed_best_u: float
    enclosed_per_u: tuple
    params_used: MetricParams
    diagnostics: tuple = ()

    @property
    def total_cells(self) -> int:
        return self.occupied_cells + self.free_cells + self.unknown_cells

    def to_dict(self) -> dict:
        return {
            "occupied_proportion": self.occupied_proportion,
            "occupied_cells": self.occupied_cells,
            "free_cells": self.free_cells,
            "unknown_cells": self.unknown_cells,
            "proportion_threshold": self.proportion_threshold,
            "corner_count": self.corner_count,
            "enclosed_area_count": self.enclosed_area_count,
            "enclosed_best_u": self.enclosed_best_u,
            "enclosed_per_u": [[u, c] for u, c in self.enclosed_per_u],
            "params_used": self.params_used.to_dict(),
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        return cls(
            occupied_proportion=data["occupied_proportion"],
            occupied_cells=data["occupied_cells"],
            free_cells=data["free_cells"],
            unknown_cells=data["unknown_cells"],
            proportion_threshold=data.get("proportion_threshold"),
            corner_count=data["corner_count"],
            enclosed_area_count=data["enclosed_area_count"],
            enclosed_best_u=data["enclosed_best_u"],
            enclosed_per_u=tuple((u, c) for u, c in data.get("enclosed_per_u", ())),
            params_used=MetricParams.from_dict(data.get("params_used", {})),
            diagnostics=tuple(data.get("diagnostics", ())),
        )


def evaluate_map(grid: OccupancyGrid, params: MetricParams = MetricParams()) -> MetricReport:
    prop = occupied_proportion(grid, params.proportion)
    corners = corner_count(grid, params.corner)
    enclosed = enclosed_area_count(grid, params.enclosed)
    diagnostics = [d for d in (prop.diagnostic, corners.diagnostic) if d]
    if enclosed.degenerate_u:
        diagnostics.append(
            f"enclosed areas: constant image at {len(enclosed.degenerate_u)} unknown value(s)"
        )
    return MetricReport(
        occupied_proportion=prop.proportion,
        occupied_cells=prop.occupied_cells,
        free_cells=prop.free_cells,
        unknown_cells=prop.unknown_cells,
        proportion_threshold=None if math.isnan(prop.threshold) else prop.threshold,
        corner_count=corners.count,
        enclosed_area_count=enclosed.count,
        enclosed_best_u=enclosed.best_u,
        enclosed_per_u=enclosed.per_u,
        params_used=params,
        diagnostics=tuple(diagnostics),
    )

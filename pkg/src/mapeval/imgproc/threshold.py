"""Otsu thresholding and binarisation."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class OtsuResult(NamedTuple):
    threshold: float
    degenerate: bool
    bin_index: int


def histogram_edges(img: np.ndarray, bins: int) -> np.ndarray:
    lo = float(img.min())
    hi = float(img.max())
    return lo + (hi - lo) * (np.arange(bins + 1, dtype=np.float64) / bins)


def bin_indices(img: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Bin of every pixel, defined by the edges so that ``bin >= k`` iff ``value >= edges[k]``."""
    bins = edges.shape[0] - 1
    idx = np.searchsorted(edges, img.ravel(), side="right") - 1
    return np.clip(idx, 0, bins - 1)


def otsu_threshold(img, bins: int = 256) -> OtsuResult:
    """Histogram threshold maximising the between-class variance.

    The histogram spans ``[min(img), max(img)]`` in ``bins`` equal bins; the
    candidate thresholds are the interior bin edges and a pixel belongs to the
    upper class iff its value is >= the returned threshold. Bin indices act as
    the gray levels. Exact ties go to the lower threshold. A constant image
    returns its value with ``degenerate=True``.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("otsu_threshold needs a non-empty image")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    if not np.isfinite(arr).all():
        raise ValueError("image contains non-finite values")
    lo = float(arr.min())
    if lo == float(arr.max()):
        return OtsuResult(lo, True, 0)

    edges = histogram_edges(arr, bins)
    hist = np.bincount(bin_indices(arr, edges), minlength=bins).astype(np.float64)
    levels = np.arange(bins, dtype=np.float64)
    n_total = hist.sum()
    s_total = float(hist @ levels)
    # split k puts bins [0, k) in the lower class
    n_low = np.cumsum(hist)[:-1]
    s_low = np.cumsum(hist * levels)[:-1]
    n_high = n_total - n_low
    valid = (n_low > 0) & (n_high > 0)
    diff = s_low * n_total - s_total * n_low
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(valid, diff * diff / (n_low * n_high), -1.0)
    k = int(np.argmax(score)) + 1
    return OtsuResult(float(edges[k]), False, k)


def binarize(img, threshold: float) -> np.ndarray:
    """Foreground where ``value >= threshold``."""
    return np.asarray(img, dtype=np.float64) >= threshold

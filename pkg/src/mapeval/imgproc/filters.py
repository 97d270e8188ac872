"""Gaussian / Laplacian-of-Gaussian filtering and Harris corners."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels


def _as_image(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2D image, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("image contains non-finite values")
    return arr


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalised sampled Gaussian of radius ``ceil(3 * sigma)``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(img, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with half-sample reflected borders."""
    kernel = gaussian_kernel1d(sigma)
    return _kernels.correlate_separable(_as_image(img), kernel)


def laplacian(img) -> np.ndarray:
    """5-point discrete Laplacian ``[[0,1,0],[1,-4,1],[0,1,0]]`` with reflected borders."""
    return _kernels.laplacian5(_as_image(img))


def laplacian_of_gaussian(img, sigma: float) -> np.ndarray:
    return laplacian(gaussian_smooth(img, sigma))


def harris_response(img, k: float = 0.04, window_sigma: float = 1.0) -> np.ndarray:
    """Per-pixel Harris measure ``det(M) - k * trace(M)**2``.

    ``M`` is the structure tensor of central-difference gradients, averaged
    with a Gaussian window of standard deviation ``window_sigma``.
    """
    if not 0.0 < k < 0.25:
        raise ValueError(f"harris k must lie in (0, 0.25), got {k}")
    if not window_sigma > 0:
        raise ValueError(f"window_sigma must be positive, got {window_sigma}")
    gx, gy = _kernels.central_gradients(_as_image(img))
    sxx = gaussian_smooth(gx * gx, window_sigma)
    syy = gaussian_smooth(gy * gy, window_sigma)
    sxy = gaussian_smooth(gx * gy, window_sigma)
    trace = sxx + syy
    return (sxx * syy - sxy * sxy) - k * trace * trace


@dataclass(frozen=True)
class Corner:
    x: int
    y: int
    response: float


def detect_corners(response, rel_threshold: float = 0.01, nms_radius: int = 2) -> list[Corner]:
    """Strict local maxima of ``response`` above ``rel_threshold * max(response)``.

    A pixel is kept only if it is strictly greater than every other pixel in
    its ``(2 * nms_radius + 1)``-square window (clipped at the image border),
    so plateaus yield nothing. Corners come back in row-major order.
    """
    if not 0.0 < rel_threshold <= 1.0:
        raise ValueError(f"rel_threshold must lie in (0, 1], got {rel_threshold}")
    if nms_radius < 1 or int(nms_radius) != nms_radius:
        raise ValueError(f"nms_radius must be an integer >= 1, got {nms_radius}")
    resp = _as_image(response)
    peak = float(resp.max())
    if peak <= 0.0:
        return []
    ys, xs = _kernels.strict_local_maxima(resp, rel_threshold * peak, int(nms_radius))
    return [Corner(int(x), int(y), float(resp[y, x])) for y, x in zip(ys, xs)]

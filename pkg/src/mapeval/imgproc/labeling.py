"""Connected-component labelling and small-blob removal."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _kernels


class Components(NamedTuple):
    """``labels`` is 0 on background and 1..n on foreground; ``sizes[i]`` counts label ``i + 1``."""

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return int(self.sizes.shape[0])


def _check_connectivity(connectivity: int):
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def connected_components(img, connectivity: int = 8) -> Components:
    """Label foreground components; labels follow the raster order of each component's first pixel."""
    _check_connectivity(connectivity)
    fg = np.asarray(img, dtype=bool)
    if fg.ndim != 2:
        raise ValueError(f"expected a 2D binary image, got shape {fg.shape}")
    labels, sizes = _kernels.label(fg, connectivity)
    return Components(labels, sizes)


def remove_small_components(img, min_size: int, connectivity: int = 8) -> np.ndarray:
    """Clear foreground components with fewer than ``min_size`` pixels."""
    if min_size < 1:
        raise ValueError(f"min_size must be >= 1, got {min_size}")
    comps = connected_components(img, connectivity)
    keep = np.concatenate(([False], comps.sizes >= min_size))
    return keep[comps.labels]

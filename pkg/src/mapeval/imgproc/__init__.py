"""Image-processing kernels behind the map metrics."""
from .contours import ContourHierarchy, hole_areas, trace_contours
from .filters import (
    Corner,
    detect_corners,
    gaussian_kernel1d,
    gaussian_smooth,
    harris_response,
    laplacian,
    laplacian_of_gaussian,
)
from .labeling import Components, connected_components, remove_small_components
from .threshold import OtsuResult, binarize, otsu_threshold

__all__ = [
    "Components",
    "ContourHierarchy",
    "Corner",
    "OtsuResult",
    "binarize",
    "connected_components",
    "detect_corners",
    "gaussian_kernel1d",
    "gaussian_smooth",
    "harris_response",
    "hole_areas",
    "laplacian",
    "laplacian_of_gaussian",
    "otsu_threshold",
    "remove_small_components",
    "trace_contours",
]

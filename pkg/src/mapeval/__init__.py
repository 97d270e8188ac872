"""Ground-truth-free quality metrics for 2D occupancy-grid maps."""
__version__ = "0.1.0"

"""Spatial-statistics feature extraction for segmented tissue images."""

__version__ = "0.1.0"

from .core import (
    DistanceGrid,
    MarkedPointPattern,
    ObservationWindow,
    default_rgrid,
    infer_window,
    parse_csv,
    serialize_csv,
    subset_by_type,
)

__all__ = [
    "DistanceGrid",
    "MarkedPointPattern",
    "ObservationWindow",
    "default_rgrid",
    "infer_window",
    "parse_csv",
    "serialize_csv",
    "subset_by_type",
    "__version__",
]

"""Certified dimension estimates for grid-schedule fractals."""

from ._core import (
    ConfigError,
    EstimatorError,
    ResolutionError,
    ScheduleParseError,
    ball,
    covering_count,
    estimate,
    moran,
    oracle,
    scale_samples,
)

__all__ = [
    "ConfigError",
    "EstimatorError",
    "ResolutionError",
    "ScheduleParseError",
    "ball",
    "covering_count",
    "estimate",
    "moran",
    "oracle",
    "scale_samples",
]

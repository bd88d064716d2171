"""Classical channel estimators and domain transforms."""

from .angle_delay import AngleDelayTransform, from_angle_delay, to_angle_delay
from .least_squares import CoarseEstimate, LeastSquaresEstimator, interpolate, ls_estimate
from .lmmse import (
    ChannelCovariance,
    LmmseEstimator,
    empirical_covariance,
    lmmse_estimate,
    load_covariance,
    save_covariance,
)

__all__ = [
    "ls_estimate",
    "interpolate",
    "CoarseEstimate",
    "LeastSquaresEstimator",
    "to_angle_delay",
    "from_angle_delay",
    "AngleDelayTransform",
    "ChannelCovariance",
    "empirical_covariance",
    "lmmse_estimate",
    "LmmseEstimator",
    "save_covariance",
    "load_covariance",
]

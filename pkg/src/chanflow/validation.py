"""Input validation helpers shared across the estimator API."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

from .exceptions import EstimationError
from .sim.channel import ChannelTensor
from .sim.pilots import PilotObservation

__all__ = ["check_channel", "check_observation", "check_is_fitted", "as_channel_array"]


def check_channel(h, dims=None):
    """Validate a channel array or ChannelTensor; returns a complex ndarray."""
    data = h.data if isinstance(h, ChannelTensor) else np.asarray(h)
    if data.ndim != 3:
        raise EstimationError(f"channel must have shape (N_r, N_t, N_c), got {data.shape}")
    if not np.isfinite(data.real).all() or not np.isfinite(data.imag).all():
        raise EstimationError("channel has non-finite entries")
    if dims is not None and tuple(data.shape) != tuple(dims):
        raise EstimationError(f"channel shape {data.shape} does not match expected {tuple(dims)}")
    return np.asarray(data, dtype=np.complex128)


def as_channel_array(h):
    return h.data if isinstance(h, ChannelTensor) else np.asarray(h, dtype=np.complex128)


def check_observation(obs):
    if not isinstance(obs, PilotObservation):
        raise EstimationError(f"expected PilotObservation, got {type(obs).__name__}")
    return obs


def check_is_fitted(estimator, attribute):
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() before using this method"
        )

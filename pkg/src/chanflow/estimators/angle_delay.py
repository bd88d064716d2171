"""Unitary angle-delay transform with real/imaginary split.

Per receive antenna, a unitary DFT along the transmit-antenna axis exposes
the angle structure and a unitary inverse DFT along the subcarrier axis
exposes the delay structure; multipath channels become sparse in this
domain. Real and imaginary parts are concatenated along the last axis, so
a complex (N_r, N_t, N_c) tensor maps to a real (N_r, N_t, 2*N_c) tensor.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..exceptions import EstimationError
from ..validation import as_channel_array

__all__ = ["to_angle_delay", "from_angle_delay", "AngleDelayTransform"]


def _transform_complex(h, mode):
    if mode == "tx-delay":
        g = np.fft.fft(h, axis=-2, norm="ortho")
        return np.fft.ifft(g, axis=-1, norm="ortho")
    if mode == "rx-tx":
        g = np.fft.fft(h, axis=-3, norm="ortho")
        return np.fft.fft(g, axis=-2, norm="ortho")
    raise EstimationError(f"unknown transform mode {mode!r}")


def _inverse_complex(g, mode):
    if mode == "tx-delay":
        h = np.fft.fft(g, axis=-1, norm="ortho")
        return np.fft.ifft(h, axis=-2, norm="ortho")
    if mode == "rx-tx":
        h = np.fft.ifft(g, axis=-2, norm="ortho")
        return np.fft.ifft(h, axis=-3, norm="ortho")
    raise EstimationError(f"unknown transform mode {mode!r}")


def to_angle_delay(h, mode="tx-delay"):
    """Map a complex channel tensor into the real angle-delay tensor.

    Accepts (..., N_r, N_t, N_c) and returns (..., N_r, N_t, 2*N_c) with
    real parts at [0, N_c) and imaginary parts at [N_c, 2*N_c). ``mode``
    picks the transformed axes: "tx-delay" (default) applies the DFT along
    transmit antennas and the inverse DFT along subcarriers; "rx-tx"
    applies DFTs along both antenna axes instead.
    """
    h = as_channel_array(h)
    if not np.isfinite(h).all():
        raise EstimationError("angle-delay transform requires finite input")
    g = _transform_complex(h, mode)
    return np.concatenate([g.real, g.imag], axis=-1)


def from_angle_delay(c, mode="tx-delay"):
    """Exact inverse of :func:`to_angle_delay`."""
    c = np.asarray(c)
    if c.shape[-1] % 2 != 0:
        raise EstimationError(f"last axis must hold stacked real/imag parts, got length {c.shape[-1]}")
    n_c = c.shape[-1] // 2
    g = c[..., :n_c] + 1j * c[..., n_c:]
    return _inverse_complex(g, mode)


class AngleDelayTransform(BaseEstimator, TransformerMixin):
    """Stateless transformer wrapping the angle-delay domain map."""

    def __init__(self, mode="tx-delay"):
        self.mode = mode

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return to_angle_delay(X, mode=self.mode)

    def inverse_transform(self, X):
        return from_angle_delay(X, mode=self.mode)

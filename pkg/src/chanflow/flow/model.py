"""Top-level generative estimator model and its condition builders."""

from __future__ import annotations

import numpy as np

from ..estimators.angle_delay import to_angle_delay
from ..estimators.least_squares import interpolate, ls_estimate
from ..nn import Module, Parameter
from ..perception.encoder import EnvironmentEncoder
from .dit import ConditionalDiT

__all__ = ["ChannelFlowModel", "pilot_condition", "channel_target"]


def pilot_condition(obs, dims, norm_scale=1.0, mode="tx-delay"):
    """Structural condition: interpolated LS estimate in angle-delay form.

    Returns a real (N_r, N_t, 2N_c) tensor scaled by 1/norm_scale so its
    element scale matches the normalized training targets.
    """
    coarse = interpolate(ls_estimate(obs), obs.pattern, dims)
    return to_angle_delay(coarse.h_interp, mode=mode) / norm_scale


def channel_target(h, norm_scale=1.0, mode="tx-delay"):
    """Training target: ground-truth channel in normalized angle-delay form."""
    return to_angle_delay(h, mode=mode) / norm_scale


class ChannelFlowModel(Module):
    """Environment encoder, velocity transformer and the null embedding.

    The null embedding replaces the fused environment sequence when the
    semantic condition is dropped (training) or withheld (pilots-only
    inference); its shape matches the fused sequence.
    """

    def __init__(self, cfg, rng, dtype=np.float32):
        self.cfg = cfg
        self.perception = EnvironmentEncoder(cfg.perception, rng, dtype)
        self.dit = ConditionalDiT(cfg, rng, dtype)
        self.null_embedding = Parameter(
            (0.02 * rng.standard_normal((cfg.perception.n_env, cfg.d_model))).astype(dtype)
        )

    def env_tokens(self, bev_grids, view_images, vphy):
        """Fused environment tokens (B, n_env, D) from raw scene features."""
        return self.perception(bev_grids, view_images, vphy)

    def null_tokens(self, batch_size):
        """Null condition broadcast to a batch: (B, n_env, D)."""
        n_env, d = self.null_embedding.shape
        ones = np.ones((batch_size, 1, 1), dtype=self.null_embedding.dtype)
        return self.null_embedding.reshape(1, n_env, d) * ones

"""Conditional diffusion-transformer velocity model.

The token sequence concatenates noisy-channel patch tokens with pilot
patch tokens under one learned positional embedding. Each block runs
timestep-modulated self-attention over the combined sequence, cross-
attention into the environment tokens, and a feed-forward stage, all with
zero-initialized gates. The velocity head reads only the channel-token
positions.
"""

from __future__ import annotations

import numpy as np

from ..nn import (
    AdaptiveLayerNorm,
    FeedForward,
    LayerNorm,
    Linear,
    Module,
    MultiHeadAttention,
    Parameter,
    Tensor,
    TimestepEmbedder,
    concat,
)
from .patching import patch_grid, patchify, unpatchify

__all__ = ["DiTBlock", "ConditionalDiT"]


class DiTBlock(Module):
    """Self-attention, cross-attention and MLP, each timestep-gated."""

    def __init__(self, dim, num_heads, rng, dtype=np.float32):
        self.ada_self = AdaptiveLayerNorm(dim, dim, rng, dtype)
        self.self_attn = MultiHeadAttention(dim, num_heads, rng, dtype)
        self.ada_cross = AdaptiveLayerNorm(dim, dim, rng, dtype)
        self.cross_attn = MultiHeadAttention(dim, num_heads, rng, dtype)
        self.ada_ff = AdaptiveLayerNorm(dim, dim, rng, dtype)
        self.ff = FeedForward(dim, rng, dtype)

    def __call__(self, x, temb, context):
        h, gate = self.ada_self.modulate(x, temb)
        x = x + gate * self.self_attn(h)
        h, gate = self.ada_cross.modulate(x, temb)
        x = x + gate * self.cross_attn(h, context)
        h, gate = self.ada_ff.modulate(x, temb)
        return x + gate * self.ff(h)


class ConditionalDiT(Module):
    """Velocity field v(H_t, t | pilot tokens, environment tokens)."""

    def __init__(self, cfg, rng, dtype=np.float32):
        d = cfg.d_model
        self.cfg = cfg
        self.patch = tuple(cfg.patch)
        self.tensor_dims = cfg.tensor_dims
        grid = patch_grid(self.tensor_dims, self.patch)
        self.num_patches = int(np.prod(grid))
        patch_dim = int(np.prod(self.patch))

        self.embed_ch = Linear(patch_dim, d, rng, dtype)
        self.embed_pilot = Linear(patch_dim, d, rng, dtype)
        self.pos_emb = Parameter((0.02 * rng.standard_normal((2 * self.num_patches, d))).astype(dtype))
        self.t_embed = TimestepEmbedder(d, rng, dtype)
        self.blocks = [DiTBlock(d, cfg.num_heads, rng, dtype) for _ in range(cfg.depth)]
        self.final_norm = LayerNorm(d, dtype, affine=False)
        self.head = Linear(d, patch_dim, rng, dtype, zero_init=True)

    def pilot_tokens(self, c_pilot):
        """Patch and embed a (B, N_r, N_t, 2N_c) pilot-condition tensor."""
        x = c_pilot if isinstance(c_pilot, Tensor) else Tensor(c_pilot)
        return self.embed_pilot(patchify(x, self.patch))

    def __call__(self, ht, t, e_pilot, c_env):
        """Velocity tensor (B, N_r, N_t, 2N_c) for interpolant state ht at t."""
        x = ht if isinstance(ht, Tensor) else Tensor(ht)
        if x.shape[-3:] != self.tensor_dims:
            raise ValueError(f"state shape {x.shape[-3:]} does not match model dims {self.tensor_dims}")
        e_ch = self.embed_ch(patchify(x, self.patch))
        seq = concat([e_ch, e_pilot], axis=1)
        seq = seq + self.pos_emb.reshape(1, *self.pos_emb.shape)
        temb = self.t_embed(t)
        for block in self.blocks:
            seq = block(seq, temb, c_env)
        out = self.head(self.final_norm(seq[:, : self.num_patches]))
        return unpatchify(out, self.tensor_dims, self.patch)

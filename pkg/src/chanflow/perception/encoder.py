"""Token encoders for the three sensing branches and their fusion.

Pipeline per scene: BEV grid -> patch tokens -> perceiver resampler;
four view renders -> small conv encoder -> per-view ID embeddings ->
perceiver resampler; RSU relative position -> feature vector -> MLP
tokens. The three token groups are concatenated, tagged with modality and
position embeddings, and fused by a gated transformer encoder into the
environment token sequence.

Residual branches carry zero-initialized gates, so every encoder block
starts as the identity map and opens up during training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import EstimationError
from ..nn import FeedForward, LayerNorm, Linear, Module, MultiHeadAttention, Parameter, Tensor, concat, gelu
from .bev import BevConfig, rasterize_bev
from .views import ViewConfig, render_views

__all__ = [
    "PerceptionConfig",
    "TokenSequence",
    "position_features",
    "PerceiverResampler",
    "GatedEncoderBlock",
    "FusionEncoder",
    "EnvironmentEncoder",
    "scene_features",
]


@dataclass(frozen=True)
class PerceptionConfig:
    """Token budgets and encoder shapes for the perception stack."""

    d_model: int = 64
    num_heads: int = 4
    n_lidar: int = 8
    n_cam: int = 8
    n_phy: int = 2
    resampler_depth: int = 2
    fusion_depth: int = 2
    bev_grid: int = 64
    bev_extent: float = 128.0
    bev_patch: int = 4
    image_size: int = 32
    conv_channels: tuple = (8, 16, 32)

    @property
    def n_env(self):
        return self.n_lidar + self.n_cam + self.n_phy

    @property
    def bev_tokens(self):
        return (self.bev_grid // self.bev_patch) ** 2

    @property
    def cam_feature_size(self):
        return self.image_size // 8  # three stride-2 stages

    @property
    def bev_config(self):
        return BevConfig(grid_size=self.bev_grid, extent=self.bev_extent)

    @property
    def view_config(self):
        return ViewConfig(image_size=self.image_size)


@dataclass(frozen=True)
class TokenSequence:
    """A (length, D) token block tagged with its source modality."""

    tokens: np.ndarray
    modality_tag: str

    def __post_init__(self):
        tokens = np.asarray(self.tokens)
        if tokens.ndim != 2 or tokens.shape[0] == 0:
            raise EstimationError(f"token sequence must be (length>0, D), got {tokens.shape}")
        if not np.isfinite(tokens).all():
            raise EstimationError("token sequence has non-finite entries")
        if self.modality_tag not in ("lidar", "camera", "position", "fused"):
            raise EstimationError(f"unknown modality tag {self.modality_tag!r}")
        object.__setattr__(self, "tokens", tokens)

    @property
    def length(self):
        return self.tokens.shape[0]


def position_features(rsu_relative):
    """Positioning feature vector [x, y, z, log d] of the relative RSU."""
    v = np.asarray(rsu_relative, dtype=np.float64).reshape(3)
    d = float(np.linalg.norm(v))
    if d == 0:
        raise EstimationError("zero-norm relative position has no direction")
    return np.array([v[0], v[1], v[2], math.log(d)])


class GatedEncoderBlock(Module):
    """Pre-norm self-attention block with zero-initialized residual gates."""

    def __init__(self, dim, num_heads, rng, dtype=np.float32):
        self.norm1 = LayerNorm(dim, dtype)
        self.attn = MultiHeadAttention(dim, num_heads, rng, dtype)
        self.gate1 = Parameter(np.zeros(dim, dtype=dtype))
        self.norm2 = LayerNorm(dim, dtype)
        self.ff = FeedForward(dim, rng, dtype)
        self.gate2 = Parameter(np.zeros(dim, dtype=dtype))

    def __call__(self, x):
        x = x + self.gate1 * self.attn(self.norm1(x))
        return x + self.gate2 * self.ff(self.norm2(x))


class ResamplerBlock(Module):
    """Cross-attention block: latent queries gather from feature tokens."""

    def __init__(self, dim, num_heads, rng, dtype=np.float32):
        self.norm_q = LayerNorm(dim, dtype)
        self.norm_kv = LayerNorm(dim, dtype)
        self.attn = MultiHeadAttention(dim, num_heads, rng, dtype)
        self.gate1 = Parameter(np.zeros(dim, dtype=dtype))
        self.norm2 = LayerNorm(dim, dtype)
        self.ff = FeedForward(dim, rng, dtype)
        self.gate2 = Parameter(np.zeros(dim, dtype=dtype))

    def __call__(self, queries, features):
        queries = queries + self.gate1 * self.attn(self.norm_q(queries), self.norm_kv(features))
        return queries + self.gate2 * self.ff(self.norm2(queries))


class PerceiverResampler(Module):
    """Learned query tokens compressing variable-length features.

    Output length equals the query count regardless of the feature count,
    and is invariant to feature order (no positional encoding is added
    here; callers add positional content to the features when order or
    layout matters).
    """

    def __init__(self, dim, num_queries, num_heads, depth, rng, dtype=np.float32):
        self.queries = Parameter((0.02 * rng.standard_normal((num_queries, dim))).astype(dtype))
        self.blocks = [ResamplerBlock(dim, num_heads, rng, dtype) for _ in range(depth)]

    def __call__(self, features):
        if features.ndim != 3:
            raise EstimationError(f"resampler features must be (B, L, D), got {features.shape}")
        b = features.shape[0]
        q = self.queries.reshape(1, *self.queries.shape) * np.ones((b, 1, 1), dtype=self.queries.dtype)
        for block in self.blocks:
            q = block(q, features)
        return q


class PatchDownsample(Module):
    """Stride-2 non-overlapping 2x2 patch convolution (as a linear map)."""

    def __init__(self, in_ch, out_ch, rng, dtype=np.float32):
        self.proj = Linear(4 * in_ch, out_ch, rng, dtype)

    def __call__(self, x):
        b, h, w, c = x.shape
        x = x.reshape(b, h // 2, 2, w // 2, 2, c)
        x = x.transpose(0, 1, 3, 2, 4, 5).reshape(b, h // 2, w // 2, 4 * c)
        return gelu(self.proj(x))


class ViewEncoder(Module):
    """Three conv downsampling stages and a projection to token width."""

    def __init__(self, cfg, rng, dtype=np.float32):
        chans = (1,) + tuple(cfg.conv_channels)
        self.stages = [PatchDownsample(chans[i], chans[i + 1], rng, dtype) for i in range(3)]
        self.proj = Linear(cfg.conv_channels[-1], cfg.d_model, rng, dtype)

    def __call__(self, images):
        # images: (B, H, W) single-channel
        b, h, w = images.shape
        x = images.reshape(b, h, w, 1)
        for stage in self.stages:
            x = stage(x)
        tokens = x.reshape(b, x.shape[1] * x.shape[2], x.shape[3])
        return self.proj(tokens)


class FusionEncoder(Module):
    """Concatenate branch tokens, tag them, and self-attend across them."""

    def __init__(self, cfg, rng, dtype=np.float32):
        d = cfg.d_model
        self.cfg = cfg
        self.modality_emb = Parameter((0.02 * rng.standard_normal((3, d))).astype(dtype))
        self.pos_emb = Parameter((0.02 * rng.standard_normal((cfg.n_env, d))).astype(dtype))
        self.blocks = [GatedEncoderBlock(d, cfg.num_heads, rng, dtype) for _ in range(cfg.fusion_depth)]

    def __call__(self, z_lidar, z_cam, z_phy):
        cfg = self.cfg
        if not (z_lidar.shape[-1] == z_cam.shape[-1] == z_phy.shape[-1]):
            raise EstimationError("fusion inputs must share the embedding dimension")
        parts = []
        for z, m in ((z_lidar, 0), (z_cam, 1), (z_phy, 2)):
            parts.append(z + self.modality_emb[m : m + 1].reshape(1, 1, -1))
        x = concat(parts, axis=1)
        x = x + self.pos_emb.reshape(1, *self.pos_emb.shape)
        for block in self.blocks:
            x = block(x)
        return x


class EnvironmentEncoder(Module):
    """Full perception stack: raw scene features to environment tokens."""

    def __init__(self, cfg, rng, dtype=np.float32):
        d = cfg.d_model
        self.cfg = cfg
        bev_feat = 2 * cfg.bev_patch**2
        self.bev_proj = Linear(bev_feat, d, rng, dtype)
        self.bev_pos = Parameter((0.02 * rng.standard_normal((cfg.bev_tokens, d))).astype(dtype))
        self.lidar_resampler = PerceiverResampler(d, cfg.n_lidar, cfg.num_heads, cfg.resampler_depth, rng, dtype)

        self.view_encoder = ViewEncoder(cfg, rng, dtype)
        n_cam_tokens = cfg.cam_feature_size**2
        self.cam_pos = Parameter((0.02 * rng.standard_normal((n_cam_tokens, d))).astype(dtype))
        self.cam_id = Parameter((0.02 * rng.standard_normal((4, d))).astype(dtype))
        self.cam_resampler = PerceiverResampler(d, cfg.n_cam, cfg.num_heads, cfg.resampler_depth, rng, dtype)

        self.phy_fc1 = Linear(4, d, rng, dtype)
        self.phy_fc2 = Linear(d, cfg.n_phy * d, rng, dtype)

        self.fusion = FusionEncoder(cfg, rng, dtype)

    def encode_lidar(self, bev_grids):
        cfg = self.cfg
        b, h, w, c = bev_grids.shape
        p = cfg.bev_patch
        x = Tensor(bev_grids)
        x = x.reshape(b, h // p, p, w // p, p, c)
        x = x.transpose(0, 1, 3, 2, 4, 5).reshape(b, cfg.bev_tokens, p * p * c)
        tokens = self.bev_proj(x) + self.bev_pos.reshape(1, *self.bev_pos.shape)
        return self.lidar_resampler(tokens)

    def encode_camera(self, view_images):
        cfg = self.cfg
        b, n_views, h, w = view_images.shape
        flat = Tensor(view_images.reshape(b * n_views, h, w))
        tokens = self.view_encoder(flat)  # (B*4, n_tok, D)
        n_tok = tokens.shape[1]
        tokens = tokens + self.cam_pos.reshape(1, *self.cam_pos.shape)
        tokens = tokens.reshape(b, n_views, n_tok, cfg.d_model)
        tokens = tokens + self.cam_id.reshape(1, 4, 1, cfg.d_model)
        tokens = tokens.reshape(b, n_views * n_tok, cfg.d_model)
        return self.cam_resampler(tokens)

    def encode_position(self, vphy):
        cfg = self.cfg
        hidden = gelu(self.phy_fc1(Tensor(vphy)))
        out = self.phy_fc2(hidden)
        return out.reshape(vphy.shape[0], cfg.n_phy, cfg.d_model)

    def __call__(self, bev_grids, view_images, vphy):
        z_lidar = self.encode_lidar(bev_grids)
        z_cam = self.encode_camera(view_images)
        z_phy = self.encode_position(vphy)
        return self.fusion(z_lidar, z_cam, z_phy)


def scene_features(aligned, cfg, dtype=np.float32):
    """Raw (non-differentiable) per-scene inputs for the encoder.

    Returns (bev grid (H, W, 2), view images (4, H_img, W_img), v_phy (4,)).
    """
    bev = rasterize_bev(aligned.scatterers_local, cfg.bev_config).grid.astype(dtype)
    views = render_views(aligned, cfg.view_config).astype(dtype)
    vphy = position_features(aligned.rsu_relative).astype(dtype)
    return bev, views, vphy

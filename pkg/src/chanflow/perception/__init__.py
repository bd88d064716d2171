"""Multimodal scene perception: BEV, view renders, token encoders."""

from .bev import BevConfig, BevMap, rasterize_bev
from .encoder import (
    EnvironmentEncoder,
    FusionEncoder,
    GatedEncoderBlock,
    PerceiverResampler,
    PerceptionConfig,
    TokenSequence,
    position_features,
    scene_features,
)
from .views import VIEW_NAMES, ViewConfig, render_views

__all__ = [
    "BevConfig",
    "BevMap",
    "rasterize_bev",
    "ViewConfig",
    "render_views",
    "VIEW_NAMES",
    "PerceptionConfig",
    "TokenSequence",
    "position_features",
    "PerceiverResampler",
    "GatedEncoderBlock",
    "FusionEncoder",
    "EnvironmentEncoder",
    "scene_features",
]

"""Conditional flow-matching channel generator."""

from .config import ModelConfig, TrainConfig, load_train_config, model_preset, save_train_config
from .dit import ConditionalDiT, DiTBlock
from .estimator import MODALITY_NAMES, FlowMatchingEstimator
from .flowmatch import (
    FlowState,
    cfg_velocity,
    euler_sample,
    flow_matching_loss,
    make_flow_state,
    reconstruct_channels,
)
from .model import ChannelFlowModel, channel_target, pilot_condition
from .patching import PatchTokens, patch_grid, patch_tokens, patchify, unpatchify
from .toy import ToyGaussian, ToyVelocityNet, sample_toy, train_toy_flow
from .training import build_model, normalization_scale, prepare_scene_cache, train_model

__all__ = [
    "ModelConfig",
    "TrainConfig",
    "model_preset",
    "load_train_config",
    "save_train_config",
    "ConditionalDiT",
    "DiTBlock",
    "FlowMatchingEstimator",
    "MODALITY_NAMES",
    "FlowState",
    "make_flow_state",
    "flow_matching_loss",
    "cfg_velocity",
    "euler_sample",
    "reconstruct_channels",
    "ChannelFlowModel",
    "pilot_condition",
    "channel_target",
    "PatchTokens",
    "patch_grid",
    "patchify",
    "unpatchify",
    "patch_tokens",
    "ToyGaussian",
    "ToyVelocityNet",
    "train_toy_flow",
    "sample_toy",
    "build_model",
    "train_model",
    "prepare_scene_cache",
    "normalization_scale",
]

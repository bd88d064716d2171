"""Synthetic scene, channel and pilot simulation."""

from .channel import ChannelTensor, PathSet, RfConfig, channel_tensor, steering_vector, synthesize_paths
from .dataset import CHANNELS_PER_SCENE, ChannelDataset, generate_dataset, load_dataset, save_dataset
from .pilots import PilotObservation, PilotPattern, pilot_signal_power, transmit
from .scene import (
    OOD_RURAL,
    URBAN,
    AlignedScene,
    Scene,
    ScenarioConfig,
    align_temporal,
    generate_scene,
    scenario_by_name,
    to_cav_frame,
    wrap_angle,
)

__all__ = [
    "Scene",
    "AlignedScene",
    "ScenarioConfig",
    "URBAN",
    "OOD_RURAL",
    "scenario_by_name",
    "generate_scene",
    "to_cav_frame",
    "align_temporal",
    "wrap_angle",
    "RfConfig",
    "PathSet",
    "ChannelTensor",
    "synthesize_paths",
    "channel_tensor",
    "steering_vector",
    "PilotPattern",
    "PilotObservation",
    "transmit",
    "pilot_signal_power",
    "ChannelDataset",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
    "CHANNELS_PER_SCENE",
]

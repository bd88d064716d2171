"""Dataset generation and the MCFD sample container.

A dataset holds scene/channel pairs at the 10:1 channel-to-scene cadence:
scenes are sensed every 100 ms while channels are sampled every 10 ms, so
each scene covers ten consecutive channel frames during which the vehicle
drifts along its heading at the scenario speed.

File layout ("MCFD" magic, little-endian): version u32, N_r/N_t/N_c u32,
sample count u32, scenario tag string, subcarrier spacing f64; then per
sample a frame id u32, scatterer count u32, vehicle pose and RSU position
as f32, scatterer coordinates as f32, and the channel tensor as f32
interleaved real/imag in (rx, tx, subcarrier) C order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._binio import FormatError, expect_magic, read_array, read_f64, read_str, read_u32, write_array, write_f64, write_str, write_u32
from ..exceptions import SimulationError
from ..seeding import derive_seed, stream
from .channel import ChannelTensor, RfConfig, channel_tensor, synthesize_paths
from .scene import Scene, generate_scene, to_cav_frame, wrap_angle

MAGIC = b"MCFD"
VERSION = 1
CHANNELS_PER_SCENE = 10
CHANNEL_FRAME_SECONDS = 0.01

__all__ = ["ChannelDataset", "generate_dataset", "save_dataset", "load_dataset", "CHANNELS_PER_SCENE"]


@dataclass
class ChannelDataset:
    """In-memory scene/channel pair collection.

    ``scene_index[i]`` maps channel sample i to its scene; consecutive
    blocks of ten samples share one scene.
    """

    scenes: list
    channels: np.ndarray  # (N, N_r, N_t, N_c) complex64
    scene_index: np.ndarray  # (N,) int
    delta_f: float
    scenario: str

    def __len__(self):
        return self.channels.shape[0]

    @property
    def dims(self):
        return self.channels.shape[1:]

    def channel(self, i):
        return ChannelTensor(data=self.channels[i].astype(np.complex128), delta_f=self.delta_f)

    def scene_of(self, i):
        return self.scenes[self.scene_index[i]]

    def signal_power(self):
        """Average per-receive-element channel power over all samples.

        Used as the SNR reference P_sig; with unit-modulus pilots cycling
        over all antennas this equals the average pilot signal power.
        """
        return float(np.mean(np.abs(self.channels) ** 2))

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        kept_scenes = sorted(set(self.scene_index[indices].tolist()))
        remap = {old: new for new, old in enumerate(kept_scenes)}
        return ChannelDataset(
            scenes=[self.scenes[i] for i in kept_scenes],
            channels=self.channels[indices].copy(),
            scene_index=np.array([remap[s] for s in self.scene_index[indices]]),
            delta_f=self.delta_f,
            scenario=self.scenario,
        )


def generate_dataset(scenario, n_scenes, seed, n_rx=4, n_tx=4, n_subcarriers=64, delta_f=120e3, rf=None):
    """Generate ``n_scenes`` scenes with ten channel frames each.

    Deterministic in (seed, scenario, dims): every random ingredient draws
    from a stream keyed by (seed, scene id, purpose). Per-scatterer bounce
    phases are frozen per scene so the ten channel frames differ only
    through vehicle motion; direct-path blockage is drawn once per scene.
    """
    rf = rf or RfConfig(n_rx=n_rx, n_tx=n_tx)
    if (rf.n_rx, rf.n_tx) != (n_rx, n_tx):
        raise SimulationError("RfConfig antenna counts disagree with requested dims")
    scenes = []
    channels = np.empty((n_scenes * CHANNELS_PER_SCENE, n_rx, n_tx, n_subcarriers), dtype=np.complex64)
    scene_index = np.empty(n_scenes * CHANNELS_PER_SCENE, dtype=np.int64)

    for i in range(n_scenes):
        scene = generate_scene(seed, scenario, frame_id=i)
        include_los = bool(stream(seed, i, purpose="blockage").uniform() < scenario.los_probability)
        if not include_los and scene.num_scatterers == 0:
            include_los = True  # guarantee at least one path
        phase_seed = derive_seed(seed, i, purpose="phase")
        heading_dir = np.array([math.cos(scene.cav_heading), math.sin(scene.cav_heading), 0.0])
        for j in range(CHANNELS_PER_SCENE):
            drifted = scene.moved(heading_dir * (scenario.cav_speed * CHANNEL_FRAME_SECONDS * j))
            aligned = to_cav_frame(drifted)
            paths = synthesize_paths(aligned, rf, include_los=include_los, seed=phase_seed)
            tensor = channel_tensor(paths, delta_f, n_subcarriers)
            sample = i * CHANNELS_PER_SCENE + j
            channels[sample] = tensor.data.astype(np.complex64)
            scene_index[sample] = i
        scenes.append(scene)

    return ChannelDataset(
        scenes=scenes, channels=channels, scene_index=scene_index, delta_f=delta_f, scenario=scenario.name
    )


def save_dataset(path, dataset):
    """Write a dataset to the MCFD container."""
    n_rx, n_tx, n_c = dataset.dims
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        write_u32(fh, VERSION)
        write_u32(fh, n_rx)
        write_u32(fh, n_tx)
        write_u32(fh, n_c)
        write_u32(fh, len(dataset))
        write_str(fh, dataset.scenario)
        write_f64(fh, dataset.delta_f)
        for i in range(len(dataset)):
            scene = dataset.scene_of(i)
            write_u32(fh, scene.frame_id)
            write_u32(fh, scene.num_scatterers)
            pose = np.concatenate([scene.cav_position, [scene.cav_heading], scene.rsu_position])
            write_array(fh, pose, np.float32)
            write_array(fh, scene.scatterers.reshape(-1), np.float32)
            interleaved = np.empty(n_rx * n_tx * n_c * 2, dtype=np.float32)
            flat = dataset.channels[i].reshape(-1)
            interleaved[0::2] = flat.real
            interleaved[1::2] = flat.imag
            write_array(fh, interleaved, np.float32)


def load_dataset(path):
    """Read an MCFD container back into a ChannelDataset."""
    with open(path, "rb") as fh:
        expect_magic(fh, MAGIC)
        version = read_u32(fh)
        if version != VERSION:
            raise FormatError(f"unsupported dataset version {version}")
        n_rx = read_u32(fh)
        n_tx = read_u32(fh)
        n_c = read_u32(fh)
        n_samples = read_u32(fh)
        scenario = read_str(fh)
        delta_f = read_f64(fh)

        scenes = []
        scene_index = np.empty(n_samples, dtype=np.int64)
        channels = np.empty((n_samples, n_rx, n_tx, n_c), dtype=np.complex64)
        last_frame_id = None
        for i in range(n_samples):
            frame_id = read_u32(fh)
            n_scat = read_u32(fh)
            pose = read_array(fh, 7, np.float32).astype(np.float64)
            scatterers = read_array(fh, n_scat * 3, np.float32).astype(np.float64).reshape(-1, 3)
            if frame_id != last_frame_id:
                scenes.append(
                    Scene(
                        scatterers=scatterers,
                        cav_position=pose[:3],
                        cav_heading=wrap_angle(float(pose[3])),  # float32 storage can round onto pi
                        rsu_position=pose[4:7],
                        scenario_tag=scenario,
                        frame_id=frame_id,
                    )
                )
                last_frame_id = frame_id
            scene_index[i] = len(scenes) - 1
            interleaved = read_array(fh, n_rx * n_tx * n_c * 2, np.float32)
            channels[i] = (interleaved[0::2] + 1j * interleaved[1::2]).astype(np.complex64).reshape(n_rx, n_tx, n_c)

    return ChannelDataset(scenes=scenes, channels=channels, scene_index=scene_index, delta_f=delta_f, scenario=scenario)

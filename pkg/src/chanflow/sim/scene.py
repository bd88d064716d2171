"""Synthetic roadside scenes and their alignment into the vehicle frame.

A scene is the sensing-side ground truth: scatterer positions, the vehicle
(receiver) pose and the roadside unit (transmitter) position, all in a
global frame. Channel synthesis and all perception run on the scene after
alignment into the vehicle body frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..exceptions import SimulationError
from ..seeding import stream

__all__ = [
    "ScenarioConfig",
    "Scene",
    "AlignedScene",
    "URBAN",
    "OOD_RURAL",
    "scenario_by_name",
    "generate_scene",
    "to_cav_frame",
    "align_temporal",
    "wrap_angle",
]


def wrap_angle(theta):
    """Wrap an angle to [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class ScenarioConfig:
    """Generator settings for one scene family.

    placement "clustered" drops scatterers around a few block-like cluster
    centers (dense urban); "scattered" spreads them uniformly (sparse,
    foliage-like rural layouts).
    """

    name: str
    scatterer_range: tuple = (6, 30)
    placement: str = "clustered"
    cluster_count_range: tuple = (2, 5)
    cluster_std: float = 4.0
    capture_radius: float = 120.0
    scatter_radius: tuple = (10.0, 90.0)
    scatterer_height: tuple = (0.0, 8.0)
    rsu_distance: tuple = (30.0, 100.0)
    rsu_height: tuple = (5.0, 10.0)
    los_probability: float = 0.7
    cav_speed: float = 10.0

    def __post_init__(self):
        lo, hi = self.scatterer_range
        if lo > hi:
            raise SimulationError(f"scatterer range min {lo} > max {hi}")
        if lo < 0:
            raise SimulationError("scatterer count cannot be negative")
        if self.placement not in ("clustered", "scattered"):
            raise SimulationError(f"unknown placement {self.placement!r}")


URBAN = ScenarioConfig(name="urban")

OOD_RURAL = ScenarioConfig(
    name="ood-rural",
    scatterer_range=(1, 6),
    placement="scattered",
    rsu_distance=(40.0, 110.0),
    los_probability=1.0,
    cav_speed=15.0,
)

_SCENARIOS = {c.name: c for c in (URBAN, OOD_RURAL)}


def scenario_by_name(name):
    try:
        return _SCENARIOS[name]
    except KeyError:
        raise SimulationError(f"unknown scenario {name!r}; known: {sorted(_SCENARIOS)}") from None


@dataclass(frozen=True)
class Scene:
    """Global-frame snapshot of one sensing instant."""

    scatterers: np.ndarray  # (M, 3) meters
    cav_position: np.ndarray  # (3,)
    cav_heading: float  # radians, global frame, wrapped to [-pi, pi)
    rsu_position: np.ndarray  # (3,)
    scenario_tag: str
    frame_id: int

    def __post_init__(self):
        object.__setattr__(self, "scatterers", np.asarray(self.scatterers, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "cav_position", np.asarray(self.cav_position, dtype=np.float64).reshape(3))
        object.__setattr__(self, "rsu_position", np.asarray(self.rsu_position, dtype=np.float64).reshape(3))
        if not (-math.pi <= self.cav_heading < math.pi):
            raise SimulationError(f"cav_heading {self.cav_heading} outside [-pi, pi)")
        if np.allclose(self.rsu_position, self.cav_position):
            raise SimulationError("rsu_position coincides with cav_position")

    @property
    def num_scatterers(self):
        return self.scatterers.shape[0]

    def moved(self, displacement, frame_id=None):
        """Copy with the vehicle translated (scatterers and RSU fixed)."""
        return replace(
            self,
            cav_position=self.cav_position + np.asarray(displacement, dtype=np.float64),
            frame_id=self.frame_id if frame_id is None else frame_id,
        )


@dataclass(frozen=True)
class AlignedScene:
    """Scene expressed in the vehicle body frame.

    The vehicle sits at the origin with its heading along +x; the RSU
    becomes a relative vector.
    """

    scatterers_local: np.ndarray  # (M, 3)
    rsu_relative: np.ndarray  # (3,)
    rsu_distance: float

    def __post_init__(self):
        object.__setattr__(self, "scatterers_local", np.asarray(self.scatterers_local, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "rsu_relative", np.asarray(self.rsu_relative, dtype=np.float64).reshape(3))
        if self.rsu_distance <= 0:
            raise SimulationError("rsu_distance must be positive")


def _sample_in_annulus(rng, r_min, r_max, n):
    # Uniform-in-area annulus sampling around the origin.
    r = np.sqrt(rng.uniform(r_min**2, r_max**2, size=n))
    phi = rng.uniform(-math.pi, math.pi, size=n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def generate_scene(seed, scenario, frame_id=0):
    """Deterministically generate one Scene for (seed, scenario).

    Scatterer positions stay within ``scenario.capture_radius`` of the
    vehicle; positions outside it are pulled radially onto the boundary.
    """
    rng = stream(seed, frame_id, purpose="scene")
    cav = np.array([rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), 0.0])
    heading = wrap_angle(rng.uniform(-math.pi, math.pi))

    rsu_dist = rng.uniform(*scenario.rsu_distance)
    rsu_azim = rng.uniform(-math.pi, math.pi)
    rsu = cav + np.array(
        [rsu_dist * math.cos(rsu_azim), rsu_dist * math.sin(rsu_azim), rng.uniform(*scenario.rsu_height)]
    )

    count = int(rng.integers(scenario.scatterer_range[0], scenario.scatterer_range[1] + 1))
    if count == 0:
        pts = np.zeros((0, 3))
    elif scenario.placement == "clustered":
        n_clusters = int(rng.integers(scenario.cluster_count_range[0], scenario.cluster_count_range[1] + 1))
        centers = _sample_in_annulus(rng, *scenario.scatter_radius, n_clusters)
        assignment = rng.integers(0, n_clusters, size=count)
        xy = centers[assignment] + rng.normal(0.0, scenario.cluster_std, size=(count, 2))
        z = rng.uniform(*scenario.scatterer_height, size=count)
        pts = np.column_stack([xy, z])
    else:
        xy = _sample_in_annulus(rng, *scenario.scatter_radius, count)
        z = rng.uniform(*scenario.scatterer_height, size=count)
        pts = np.column_stack([xy, z])

    if count:
        dist = np.linalg.norm(pts, axis=1)
        over = dist > scenario.capture_radius
        if over.any():
            pts[over] *= (scenario.capture_radius / dist[over])[:, None]
        pts = pts + np.array([cav[0], cav[1], 0.0])

    return Scene(
        scatterers=pts,
        cav_position=cav,
        cav_heading=heading,
        rsu_position=rsu,
        scenario_tag=scenario.name,
        frame_id=frame_id,
    )


def to_cav_frame(scene):
    """Rigidly map a Scene into the vehicle body frame.

    Translate by -cav_position, then rotate by -cav_heading about z, so the
    heading direction lands on +x.
    """
    c, s = math.cos(-scene.cav_heading), math.sin(-scene.cav_heading)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    scatterers = (scene.scatterers - scene.cav_position) @ rot.T
    rsu_rel = rot @ (scene.rsu_position - scene.cav_position)
    return AlignedScene(
        scatterers_local=scatterers,
        rsu_relative=rsu_rel,
        rsu_distance=float(np.linalg.norm(rsu_rel)),
    )


def align_temporal(scene_frames, channel_frames, ratio=10):
    """Pair each scene with its block of ``ratio`` consecutive channels.

    Scenes are sampled ten times slower than channels, so scene i covers
    channel frames [ratio*i, ratio*(i+1)).
    """
    if len(channel_frames) != ratio * len(scene_frames):
        raise SimulationError(
            f"temporal alignment needs {ratio} channels per scene: "
            f"{len(scene_frames)} scenes vs {len(channel_frames)} channels"
        )
    pairs = []
    for i, scene in enumerate(scene_frames):
        for j in range(ratio):
            pairs.append((scene, channel_frames[ratio * i + j]))
    return pairs

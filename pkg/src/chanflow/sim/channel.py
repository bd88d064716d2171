"""Geometric multipath synthesis and the frequency-domain channel tensor.

Each propagation path carries a rank-1 gain matrix built from uniform
linear array (ULA) steering vectors at both ends, and a geometric delay.
The channel tensor follows as a superposition of per-path complex
exponentials across subcarriers.

Array conventions (fixed, vehicle body frame):
  * receive ULA along the vehicle y-axis, broadside along +x (the heading);
  * transmit ULA at the RSU horizontal and perpendicular to the RSU-to-
    vehicle sightline, i.e. boresight facing the vehicle;
  * half-wavelength element spacing at both ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import SimulationError

__all__ = ["RfConfig", "PathSet", "ChannelTensor", "synthesize_paths", "channel_tensor", "steering_vector"]

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class RfConfig:
    """Radio geometry-to-gain settings.

    ``los_ref_gain`` and ``scatter_ref_gain`` are the free proportionality
    constants of the amplitude laws |a| = los_ref_gain / d for the direct
    path and |a| = scatter_ref_gain * reflection_coeff / (d1 * d2) for a
    single bounce; the defaults keep aggregate bounce energy roughly 10 dB
    below a typical direct path so blocked scenes remain estimable.
    """

    carrier_hz: float = 28e9
    n_rx: int = 4
    n_tx: int = 4
    reflection_coeff: float = 0.3
    los_ref_gain: float = 1.0
    scatter_ref_gain: float = 10.0
    speed_of_light: float = SPEED_OF_LIGHT


@dataclass(frozen=True)
class PathSet:
    """L propagation paths: complex gain matrices and delays."""

    gains: np.ndarray  # (L, N_r, N_t) complex
    delays: np.ndarray  # (L,) seconds

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=np.complex128)
        delays = np.asarray(self.delays, dtype=np.float64).reshape(-1)
        if gains.ndim != 3 or gains.shape[0] != delays.shape[0]:
            raise SimulationError(f"inconsistent path arrays: gains {gains.shape}, delays {delays.shape}")
        if (delays < 0).any():
            raise SimulationError("path delays must be nonnegative")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "delays", delays)

    @property
    def num_paths(self):
        return self.delays.shape[0]


@dataclass(frozen=True)
class ChannelTensor:
    """Frequency-domain channel H of shape (N_r, N_t, N_c)."""

    data: np.ndarray
    delta_f: float

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise SimulationError(f"channel tensor must be 3-d, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise SimulationError("channel tensor has non-finite entries")
        if self.delta_f <= 0:
            raise SimulationError("delta_f must be positive")
        object.__setattr__(self, "data", data.astype(np.complex128, copy=False))

    @property
    def n_rx(self):
        return self.data.shape[0]

    @property
    def n_tx(self):
        return self.data.shape[1]

    @property
    def n_subcarriers(self):
        return self.data.shape[2]


def steering_vector(n_elements, direction_cosine):
    """Half-wavelength ULA steering vector for the given direction cosine."""
    n = np.arange(n_elements)
    return np.exp(1j * np.pi * n * direction_cosine)


def _unit(v):
    norm = np.linalg.norm(v)
    if norm == 0:
        raise SimulationError("zero-length direction vector")
    return v / norm


def _tx_array_axis(rsu_relative):
    # Horizontal unit vector perpendicular to the RSU->vehicle sightline.
    x, y = rsu_relative[0], rsu_relative[1]
    norm = np.hypot(x, y)
    if norm == 0:
        raise SimulationError("RSU directly above the vehicle; transmit array axis undefined")
    return np.array([y / norm, -x / norm, 0.0])


def synthesize_paths(aligned, rf, include_los=True, seed=0):
    """Build the PathSet of a vehicle-frame scene.

    One direct path (when ``include_los``) plus one single-bounce path per
    scatterer. Per-path gain matrices are rank-1 steering outer products
    scaled by the geometric amplitude laws in :class:`RfConfig`; bounce
    paths additionally carry a per-scatterer uniform random phase drawn
    from ``seed``, so repeated calls with one seed are reproducible.
    """
    rng = np.random.default_rng(seed)
    scatterers = aligned.scatterers_local
    phases = rng.uniform(0.0, 2.0 * np.pi, size=scatterers.shape[0])

    if not include_los and scatterers.shape[0] == 0:
        raise SimulationError("no propagation paths: direct path disabled and no scatterers")

    rsu = aligned.rsu_relative
    tx_axis = _tx_array_axis(rsu)
    rx_axis = np.array([0.0, 1.0, 0.0])
    two_pi_fc = 2.0 * np.pi * rf.carrier_hz

    gains = []
    delays = []

    if include_los:
        d = aligned.rsu_distance
        u_arrival = _unit(rsu)  # vehicle toward RSU
        u_departure = _unit(-rsu)  # RSU toward vehicle
        tau = d / rf.speed_of_light
        a_r = steering_vector(rf.n_rx, float(u_arrival @ rx_axis))
        a_t = steering_vector(rf.n_tx, float(u_departure @ tx_axis))
        alpha = (rf.los_ref_gain / d) * np.exp(-1j * two_pi_fc * tau)
        gains.append(alpha * np.outer(a_r, a_t.conj()))
        delays.append(tau)

    for idx in range(scatterers.shape[0]):
        p = scatterers[idx]
        leg_tx = np.linalg.norm(p - rsu)  # RSU -> scatterer
        leg_rx = np.linalg.norm(p)  # scatterer -> vehicle
        if leg_tx == 0 or leg_rx == 0:
            continue  # degenerate geometry, no well-defined bounce
        tau = (leg_tx + leg_rx) / rf.speed_of_light
        u_arrival = _unit(p)
        u_departure = _unit(p - rsu)
        a_r = steering_vector(rf.n_rx, float(u_arrival @ rx_axis))
        a_t = steering_vector(rf.n_tx, float(u_departure @ tx_axis))
        magnitude = rf.scatter_ref_gain * rf.reflection_coeff / (leg_tx * leg_rx)
        alpha = magnitude * np.exp(1j * (phases[idx] - two_pi_fc * tau))
        gains.append(alpha * np.outer(a_r, a_t.conj()))
        delays.append(tau)

    if not gains:
        raise SimulationError("no propagation paths: all bounce geometries degenerate")
    return PathSet(gains=np.stack(gains), delays=np.array(delays))


def channel_tensor(paths, delta_f, n_subcarriers):
    """Superpose paths into H[k] = sum_l A_l exp(-j 2 pi k delta_f tau_l)."""
    if n_subcarriers < 1:
        raise SimulationError("n_subcarriers must be >= 1")
    if delta_f <= 0:
        raise SimulationError("delta_f must be positive")
    k = np.arange(n_subcarriers)
    rotation = np.exp(-2j * np.pi * np.outer(paths.delays * delta_f, k))  # (L, N_c)
    data = np.einsum("lrt,lk->rtk", paths.gains, rotation)
    return ChannelTensor(data=data, delta_f=delta_f)

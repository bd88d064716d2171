"""Interleaved pilot patterns and noisy pilot transmission.

Pilot subcarriers are assigned cyclically to transmit antennas, so each
pilot subcarrier probes exactly one column of the channel matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import SimulationError

__all__ = ["PilotPattern", "PilotObservation", "transmit", "pilot_signal_power"]


@dataclass(frozen=True)
class PilotPattern:
    """Pilot subcarrier set, per-pilot active antenna and pilot symbols."""

    spacing: int
    pilot_indices: np.ndarray  # (n_p,) ordered subcarrier indices
    antenna_map: np.ndarray  # (n_p,) active transmit antenna per pilot
    symbols: np.ndarray  # (n_p,) unit-modulus pilot symbols

    def __post_init__(self):
        idx = np.asarray(self.pilot_indices, dtype=np.int64).reshape(-1)
        ant = np.asarray(self.antenna_map, dtype=np.int64).reshape(-1)
        sym = np.asarray(self.symbols, dtype=np.complex128).reshape(-1)
        if not (idx.shape == ant.shape == sym.shape):
            raise SimulationError("pilot pattern arrays must have equal length")
        if idx.size == 0:
            raise SimulationError("pilot pattern is empty")
        if (np.diff(idx) <= 0).any():
            raise SimulationError("pilot subcarriers must be strictly increasing")
        if not np.allclose(np.abs(sym), 1.0):
            raise SimulationError("pilot symbols must be unit modulus")
        object.__setattr__(self, "pilot_indices", idx)
        object.__setattr__(self, "antenna_map", ant)
        object.__setattr__(self, "symbols", sym)

    @classmethod
    def interleaved(cls, spacing, n_subcarriers, n_tx):
        """Pilots every ``spacing`` subcarriers, antennas cycled in order."""
        if spacing < 1:
            raise SimulationError("pilot spacing must be >= 1")
        idx = np.arange(0, n_subcarriers, spacing)
        return cls(
            spacing=spacing,
            pilot_indices=idx,
            antenna_map=np.arange(idx.size) % n_tx,
            symbols=np.ones(idx.size, dtype=np.complex128),
        )

    @property
    def num_pilots(self):
        return self.pilot_indices.shape[0]

    def validate_against(self, channel):
        if self.pilot_indices.max() >= channel.n_subcarriers:
            raise SimulationError(
                f"pilot subcarrier {self.pilot_indices.max()} outside channel with {channel.n_subcarriers} subcarriers"
            )
        if self.antenna_map.max() >= channel.n_tx:
            raise SimulationError(
                f"pilot antenna {self.antenna_map.max()} outside channel with {channel.n_tx} transmit antennas"
            )


@dataclass(frozen=True)
class PilotObservation:
    """Received pilot vectors, one length-N_r vector per pilot subcarrier."""

    received: np.ndarray  # (n_p, N_r) complex
    pattern: PilotPattern
    noise_variance: float  # total noise power across the receive array
    snr_db: float

    def __post_init__(self):
        rx = np.asarray(self.received, dtype=np.complex128)
        if rx.ndim != 2 or rx.shape[0] != self.pattern.num_pilots:
            raise SimulationError(f"received shape {rx.shape} inconsistent with {self.pattern.num_pilots} pilots")
        if self.noise_variance < 0:
            raise SimulationError("noise variance cannot be negative")
        object.__setattr__(self, "received", rx)

    @property
    def n_rx(self):
        return self.received.shape[1]


def pilot_signal_power(channel, pattern):
    """Per-receive-element pilot signal power of one channel realization."""
    cols = channel.data[:, pattern.antenna_map, pattern.pilot_indices]  # (N_r, n_p)
    return float(np.mean(np.abs(cols) ** 2))


def transmit(channel, pattern, snr_db, seed, signal_power=None):
    """Simulate pilot transmission through a channel at the given SNR.

    The noise level follows snr_db = 10 log10(P_sig / sigma^2) where
    ``signal_power`` (P_sig) defaults to this realization's own pilot
    power; dataset pipelines pass the training-set average instead so one
    SNR axis means the same noise level for every method. sigma^2 is the
    total noise power across the array: each of the N_r receive elements
    sees circularly-symmetric complex noise of variance sigma^2 / N_r.
    An infinite ``snr_db`` selects the exact noiseless mode.
    """
    pattern.validate_against(channel)
    n_rx = channel.n_rx
    if signal_power is None:
        signal_power = pilot_signal_power(channel, pattern)

    if np.isinf(snr_db):
        sigma2 = 0.0
    else:
        sigma2 = signal_power / (10.0 ** (snr_db / 10.0))

    clean = channel.data[:, pattern.antenna_map, pattern.pilot_indices].T * pattern.symbols[:, None]  # (n_p, N_r)
    if sigma2 > 0:
        rng = np.random.default_rng(seed)
        scale = np.sqrt(sigma2 / (2.0 * n_rx))
        noise = scale * (rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape))
        received = clean + noise
    else:
        received = clean
    return PilotObservation(received=received, pattern=pattern, noise_variance=sigma2, snr_db=float(snr_db))

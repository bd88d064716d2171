"""Empirical-covariance LMMSE estimation in the vectorized channel space.

Channels are vectorized receive-antenna fastest, then transmit antenna,
then subcarrier (Fortran order of the (N_r, N_t, N_c) tensor). With pilot
observations y = A h + n, where A selects and scales the observed entries,
the estimator is the textbook Wiener filter built from the sample mean and
sample covariance of the vectorized channels.

Covariance cache layout ("MCFC" magic, little-endian): version u32,
N_r/N_t/N_c u32, sample count u32, then mean and covariance as f64
interleaved real/imag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator

from .._binio import FormatError, expect_magic, read_array, read_u32, write_array, write_u32
from ..exceptions import EstimationError
from ..validation import check_is_fitted, check_observation

MAGIC = b"MCFC"
VERSION = 1

__all__ = ["ChannelCovariance", "empirical_covariance", "lmmse_estimate", "LmmseEstimator", "save_covariance", "load_covariance"]


@dataclass(frozen=True)
class ChannelCovariance:
    """Sample mean and Hermitian sample covariance of vectorized channels."""

    mean: np.ndarray  # (D,) complex
    cov: np.ndarray  # (D, D) complex Hermitian PSD
    sample_count: int
    dims: tuple  # (N_r, N_t, N_c)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.complex128).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.complex128)
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise EstimationError(f"covariance shape {cov.shape} inconsistent with mean length {d}")
        herm = np.abs(cov - cov.conj().T).max()
        if herm > 1e-10 * max(1.0, np.abs(cov).max()):
            raise EstimationError(f"covariance not Hermitian (max asymmetry {herm:.3e})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.shape[0]


def vectorize_channel(h):
    """Flatten (N_r, N_t, N_c) with the receive antenna varying fastest."""
    return np.asarray(h).reshape(-1, order="F")


def unvectorize_channel(v, dims):
    return np.asarray(v).reshape(dims, order="F")


def empirical_covariance(channels, dims=None):
    """Sample mean/covariance of a dataset of channel tensors.

    ``channels`` is an array (N, N_r, N_t, N_c) or a ChannelDataset; the
    sample covariance uses the 1/(N-1) normalization and is symmetrized
    exactly, so C equals its own conjugate transpose bit for bit.
    """
    if hasattr(channels, "channels"):
        channels = channels.channels
    channels = np.asarray(channels)
    if channels.ndim != 4:
        raise EstimationError(f"expected (N, N_r, N_t, N_c) channels, got shape {channels.shape}")
    n = channels.shape[0]
    if n < 2:
        raise EstimationError(f"need at least 2 samples for a covariance, got {n}")
    dims = dims or channels.shape[1:]
    x = _vectorize_batch(channels)
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.conj().T @ centered / (n - 1)
    cov = 0.5 * (cov + cov.conj().T)
    return ChannelCovariance(mean=mean, cov=cov, sample_count=n, dims=tuple(dims))


def _vectorize_batch(channels):
    # Rx-fastest (F-order) flatten per sample, batched.
    n = channels.shape[0]
    return channels.astype(np.complex128).transpose(0, 3, 2, 1).reshape(n, -1)


def _selection_matrix(pattern, dims):
    n_rx, n_tx, n_c = dims
    n_obs = pattern.num_pilots * n_rx
    a = np.zeros((n_obs, n_rx * n_tx * n_c), dtype=np.complex128)
    rows = np.arange(n_obs)
    pilots = np.repeat(np.arange(pattern.num_pilots), n_rx)
    rx = np.tile(np.arange(n_rx), pattern.num_pilots)
    cols = rx + pattern.antenna_map[pilots] * n_rx + pattern.pilot_indices[pilots] * n_rx * n_tx
    a[rows, cols] = pattern.symbols[pilots]
    return a


def lmmse_estimate(obs, covariance):
    """Wiener-filter channel estimate from one pilot observation.

    Solves the innovation system with a Cholesky factorization after adding
    the fixed diagonal regularization eps = 1e-9 * trace / dim; raises if
    the system is singular beyond that.
    """
    obs = check_observation(obs)
    dims = covariance.dims
    n_rx = dims[0]
    if obs.n_rx != n_rx:
        raise EstimationError(f"observation has {obs.n_rx} receive antennas, covariance expects {n_rx}")
    if obs.pattern.pilot_indices.max() >= dims[2] or obs.pattern.antenna_map.max() >= dims[1]:
        raise EstimationError("pilot pattern outside the covariance dimensions")

    a = _selection_matrix(obs.pattern, dims)
    y = obs.received.reshape(-1)  # pilot-major, rx fastest
    mean = covariance.mean
    cov = covariance.cov

    ca_h = cov @ a.conj().T  # (D, n_obs)
    innovation = a @ ca_h
    noise_per_element = obs.noise_variance / n_rx
    idx = np.arange(innovation.shape[0])
    innovation[idx, idx] += noise_per_element
    eps = 1e-9 * np.real(np.trace(innovation)) / innovation.shape[0]
    innovation[idx, idx] += eps
    try:
        factor = linalg.cho_factor(innovation)
        weights = linalg.cho_solve(factor, y - a @ mean)
    except linalg.LinAlgError as err:
        raise EstimationError(f"innovation matrix singular beyond regularization: {err}") from err
    h_vec = mean + ca_h @ weights
    return unvectorize_channel(h_vec, dims)


class LmmseEstimator(BaseEstimator):
    """LMMSE channel estimator fitted on a dataset of channel tensors."""

    def __init__(self):
        self.covariance_ = None

    def fit(self, dataset, y=None):
        self.covariance_ = empirical_covariance(dataset)
        return self

    def predict(self, obs):
        check_is_fitted(self, "covariance_")
        return lmmse_estimate(obs, self.covariance_)


def save_covariance(path, covariance):
    """Write a ChannelCovariance to the MCFC cache format."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        write_u32(fh, VERSION)
        for dim in covariance.dims:
            write_u32(fh, dim)
        write_u32(fh, covariance.sample_count)
        for arr in (covariance.mean, covariance.cov):
            flat = np.asarray(arr, dtype=np.complex128).reshape(-1)
            interleaved = np.empty(flat.size * 2, dtype=np.float64)
            interleaved[0::2] = flat.real
            interleaved[1::2] = flat.imag
            write_array(fh, interleaved, np.float64)


def load_covariance(path):
    """Read a ChannelCovariance from the MCFC cache format."""
    with open(path, "rb") as fh:
        expect_magic(fh, MAGIC)
        version = read_u32(fh)
        if version != VERSION:
            raise FormatError(f"unsupported covariance version {version}")
        dims = tuple(read_u32(fh) for _ in range(3))
        count = read_u32(fh)
        d = int(np.prod(dims))
        mean_raw = read_array(fh, 2 * d, np.float64)
        mean = mean_raw[0::2] + 1j * mean_raw[1::2]
        cov_raw = read_array(fh, 2 * d * d, np.float64)
        cov = (cov_raw[0::2] + 1j * cov_raw[1::2]).reshape(d, d)
    return ChannelCovariance(mean=mean, cov=cov, sample_count=count, dims=dims)

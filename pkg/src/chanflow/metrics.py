"""Reconstruction metrics: NMSE and per-subcarrier cosine similarity."""

from __future__ import annotations

import numpy as np

from .exceptions import EstimationError
from .validation import as_channel_array

__all__ = ["nmse", "nmse_db", "cosine_sim", "NMSE_DB_FLOOR"]

NMSE_DB_FLOOR = -100.0


def nmse(h_true, h_est):
    """Normalized mean-squared error over an evaluation set.

    Accepts matching arrays of shape (..., N_r, N_t, N_c); all leading
    axes index the evaluation set. Computed as the ratio of summed squared
    Frobenius error norms to summed squared truth norms.
    """
    h_true = as_channel_array(h_true)
    h_est = as_channel_array(h_est)
    if h_true.shape != h_est.shape:
        raise EstimationError(f"shape mismatch: truth {h_true.shape} vs estimate {h_est.shape}")
    denom = float(np.sum(np.abs(h_true) ** 2))
    if denom == 0.0:
        raise EstimationError("NMSE undefined: evaluation set of all-zero channels")
    return float(np.sum(np.abs(h_true - h_est) ** 2)) / denom


def nmse_db(ratio, floor=NMSE_DB_FLOOR):
    """NMSE in dB, flooring exact-zero error at ``floor`` instead of -inf."""
    if ratio < 0:
        raise EstimationError("NMSE ratio cannot be negative")
    if ratio == 0.0:
        return floor
    return max(10.0 * np.log10(ratio), floor)


def cosine_sim(h_true, h_est, return_skipped=False):
    """Structural alignment |tr(H^H Hhat)| / (||H||_F ||Hhat||_F).

    Evaluated per subcarrier on the (N_r, N_t) matrices, then averaged
    over subcarriers and the evaluation set. Subcarriers where either
    matrix has zero norm are skipped and counted; if everything is
    skipped the metric is undefined and raises.
    """
    h_true = as_channel_array(h_true)
    h_est = as_channel_array(h_est)
    if h_true.shape != h_est.shape:
        raise EstimationError(f"shape mismatch: truth {h_true.shape} vs estimate {h_est.shape}")
    # (..., N_r, N_t, N_c) -> per-(sample, subcarrier) trace over the antenna axes
    trace = np.abs(np.sum(h_true.conj() * h_est, axis=(-3, -2)))
    norm_true = np.sqrt(np.sum(np.abs(h_true) ** 2, axis=(-3, -2)))
    norm_est = np.sqrt(np.sum(np.abs(h_est) ** 2, axis=(-3, -2)))
    valid = (norm_true > 0) & (norm_est > 0)
    skipped = int(valid.size - valid.sum())
    if not valid.any():
        raise EstimationError("cosine similarity undefined: all subcarrier matrices have zero norm")
    values = trace[valid] / (norm_true[valid] * norm_est[valid])
    result = float(values.mean())
    if return_skipped:
        return result, skipped
    return result

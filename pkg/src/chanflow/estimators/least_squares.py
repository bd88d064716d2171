"""Least-squares pilot estimation and full-band linear interpolation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..exceptions import EstimationError
from ..validation import check_observation

__all__ = ["ls_estimate", "interpolate", "CoarseEstimate", "LeastSquaresEstimator"]


@dataclass(frozen=True)
class CoarseEstimate:
    """Interpolated full-band LS estimate, shaped like the channel."""

    h_interp: np.ndarray  # (N_r, N_t, N_c) complex

    def __post_init__(self):
        h = np.asarray(self.h_interp, dtype=np.complex128)
        if h.ndim != 3 or not np.isfinite(h).all():
            raise EstimationError(f"coarse estimate must be a finite 3-d tensor, got shape {h.shape}")
        object.__setattr__(self, "h_interp", h)


def ls_estimate(obs):
    """Per-pilot least squares: divide the received vector by the symbol.

    Returns a dict mapping (subcarrier, transmit antenna) to the estimated
    length-N_r channel column, in pilot order.
    """
    obs = check_observation(obs)
    pattern = obs.pattern
    if np.any(np.abs(pattern.symbols) == 0):
        raise EstimationError("pilot symbol is zero; LS estimate undefined")
    columns = obs.received / pattern.symbols[:, None]  # (n_p, N_r)
    return {
        (int(k), int(t)): columns[i]
        for i, (k, t) in enumerate(zip(pattern.pilot_indices, pattern.antenna_map))
    }


def interpolate(ls, pattern, dims):
    """Linearly interpolate sparse LS estimates to every subcarrier.

    Per (receive, transmit) antenna pair the estimates at that antenna's
    pilot subcarriers are interpolated along the subcarrier axis; beyond
    the first/last pilot the edge value is held. Every transmit antenna
    needs at least one pilot.
    """
    n_rx, n_tx, n_c = dims
    h = np.empty((n_rx, n_tx, n_c), dtype=np.complex128)
    grid = np.arange(n_c)
    for t in range(n_tx):
        pilot_ks = np.array(sorted(k for (k, ant) in ls if ant == t))
        if pilot_ks.size == 0:
            raise EstimationError(
                f"transmit antenna {t} has no pilots (spacing {pattern.spacing} too sparse for {n_c} subcarriers)"
            )
        values = np.stack([ls[(int(k), t)] for k in pilot_ks], axis=0)  # (n_k, N_r)
        for r in range(n_rx):
            h[r, t] = np.interp(grid, pilot_ks, values[:, r])
    return CoarseEstimate(h_interp=h)


class LeastSquaresEstimator(BaseEstimator):
    """Pilot LS plus interpolation, as a fit/predict estimator.

    Stateless: ``fit`` only records the channel dimensions when given a
    dataset, and ``predict`` maps one pilot observation to a full-band
    channel estimate.
    """

    def __init__(self, dims=None):
        self.dims = dims

    def fit(self, dataset=None, y=None):
        if dataset is not None:
            self.dims_ = tuple(dataset.dims)
        elif self.dims is not None:
            self.dims_ = tuple(self.dims)
        else:
            raise EstimationError("LeastSquaresEstimator needs dims or a dataset to fit")
        return self

    def predict(self, obs):
        dims = getattr(self, "dims_", None) or self.dims
        if dims is None:
            raise EstimationError("estimator dims unknown; call fit() or pass dims=")
        return interpolate(ls_estimate(obs), obs.pattern, dims).h_interp

"""Flow-matching state algebra, training loss, guidance and sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..estimators.angle_delay import from_angle_delay
from ..exceptions import EstimationError
from ..nn import Tensor, no_grad

__all__ = [
    "FlowState",
    "make_flow_state",
    "flow_matching_loss",
    "cfg_velocity",
    "euler_sample",
    "reconstruct_channels",
]


@dataclass(frozen=True)
class FlowState:
    """One linear-interpolation training state.

    Constructed so the defining identities hold bitwise:
    ht = t*h1 + (1-t)*h0 and v_target = h1 - h0.
    """

    h0: np.ndarray
    h1: np.ndarray
    t: float
    ht: np.ndarray
    v_target: np.ndarray

    @classmethod
    def create(cls, h0, h1, t):
        h0 = np.asarray(h0)
        h1 = np.asarray(h1)
        return cls(h0=h0, h1=h1, t=float(t), ht=t * h1 + (1.0 - t) * h0, v_target=h1 - h0)


def make_flow_state(h1, rng, t=None):
    """Draw (t, H_0) and build the interpolant state for one target."""
    h1 = np.asarray(h1)
    if t is None:
        t = float(rng.uniform(0.0, 1.0))
    h0 = rng.standard_normal(h1.shape).astype(h1.dtype)
    return FlowState.create(h0, h1, t)


def _interpolant_batch(h1, rng, dtype):
    """Per-sample draws for a batch; draw order (t, noise) is fixed."""
    b = h1.shape[0]
    t = rng.uniform(0.0, 1.0, size=b)
    h0 = rng.standard_normal(h1.shape).astype(dtype)
    tb = t.reshape(b, 1, 1, 1).astype(dtype)
    ht = tb * h1 + (1.0 - tb) * h0
    return t, h0, ht


def flow_matching_loss(model, h1, c_pilot, env_inputs, p_drop, rng):
    """Velocity-regression loss over one batch.

    Per sample: draw t ~ U[0,1] and H_0 ~ N(0, I), form the interpolant,
    and with probability ``p_drop`` swap the fused environment tokens for
    the learned null embedding. Returns the scalar mean-squared error
    between the predicted and true velocity. Deterministic given
    (parameters, batch, rng state).
    """
    h1 = np.asarray(h1)
    if h1.ndim != 4 or h1.shape[0] == 0:
        raise EstimationError("flow_matching_loss expects a nonempty (B, N_r, N_t, 2N_c) batch")
    b = h1.shape[0]
    dtype = model.null_embedding.dtype
    t, h0, ht = _interpolant_batch(h1, rng, dtype)
    drop = (rng.uniform(0.0, 1.0, size=b) < p_drop).astype(dtype)

    bev, views, vphy = env_inputs
    c_env = model.env_tokens(bev, views, vphy)
    c_null = model.null_tokens(b)
    mask = drop.reshape(b, 1, 1)
    c_used = c_env * (1.0 - mask) + c_null * mask

    e_pilot = model.dit.pilot_tokens(np.asarray(c_pilot, dtype=dtype))
    v_pred = model.dit(Tensor(ht.astype(dtype)), t, e_pilot, c_used)
    target = Tensor((h1 - h0).astype(dtype))
    diff = v_pred - target
    return (diff * diff).mean()


def cfg_velocity(dit, ht, t, e_pilot, c_env, c_null, w):
    """Classifier-free-guided velocity from exactly two forward passes.

    Blend: v_null + w * (v_cond - v_null). The endpoints w=0 and w=1
    return the corresponding pass untouched so the algebraic identities
    hold bitwise.
    """
    v_null = dit(ht, t, e_pilot, c_null)
    v_cond = dit(ht, t, e_pilot, c_env)
    if w == 0:
        return v_null
    if w == 1:
        return v_cond
    return v_null + w * (v_cond - v_null)


def euler_sample(dit, e_pilot, c_env, c_null, shape, w, steps, rng):
    """Integrate the guided velocity field from noise with uniform steps.

    One step realizes the single-evaluation reconstruction
    H_1 = H_0 + v(H_0, 0); more steps follow the same trajectory with
    step size 1/steps. Returns the final state as a numpy array.
    """
    if steps < 1:
        raise EstimationError("sampling needs steps >= 1")
    dtype = np.float32 if c_null.dtype == np.float32 else np.float64
    b = shape[0]
    x = rng.standard_normal(shape).astype(dtype)
    dt = 1.0 / steps
    with no_grad():
        for i in range(steps):
            t = np.full(b, i * dt)
            v = cfg_velocity(dit, Tensor(x), t, e_pilot, c_env, c_null, w)
            x = x + v.data * dt
    return x


def reconstruct_channels(samples, norm_scale, mode="tx-delay"):
    """Undo normalization and map angle-delay samples back to frequency."""
    return from_angle_delay(np.asarray(samples) * norm_scale, mode=mode)

"""Unconditional 2-d flow-matching sanity task.

Trains a small velocity MLP to transport standard Gaussian noise onto a
known 2-d Gaussian. Noise/data pairs within each batch are coupled by an
optimal-transport assignment (squared cost) rather than independently:
with independent pairing the exact velocity field at t=0 is the
conditional mean E[x1] - x0, so one-step samples would all collapse onto
the target mean. The assignment straightens the marginal flow enough that
a single Euler step reproduces both mean and covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..nn import AdamW, Linear, Module, Tensor, cosine_lr, gelu, no_grad
from ..seeding import stream

__all__ = ["ToyGaussian", "ToyVelocityNet", "train_toy_flow", "sample_toy"]


@dataclass(frozen=True)
class ToyGaussian:
    """Target distribution: mean vector and 2x2 covariance."""

    mean: tuple = (1.5, -0.8)
    cov: tuple = ((1.0, 0.6), (0.6, 1.0))

    def sample(self, rng, n):
        return rng.multivariate_normal(np.asarray(self.mean), np.asarray(self.cov), size=n)


class ToyVelocityNet(Module):
    """Two-layer MLP velocity field on (x, t) inputs."""

    def __init__(self, rng, hidden=64, dtype=np.float64):
        self.fc1 = Linear(3, hidden, rng, dtype)
        self.fc2 = Linear(hidden, 2, rng, dtype)

    def __call__(self, x, t):
        t_col = np.broadcast_to(np.asarray(t, dtype=x.dtype).reshape(-1, 1), (x.shape[0], 1))
        inp = np.concatenate([x, t_col], axis=1)
        return self.fc2(gelu(self.fc1(Tensor(inp))))


def _ot_pairing(x0, x1):
    """Squared-cost assignment permuting x1 rows onto x0 rows."""
    cost = ((x0[:, None, :] - x1[None, :, :]) ** 2).sum(-1)
    rows, cols = linear_sum_assignment(cost)
    paired = np.empty_like(x1)
    paired[rows] = x1[cols]
    return paired


def train_toy_flow(target=ToyGaussian(), steps=1500, batch=256, lr=3e-3, seed=0):
    """Train the toy velocity net; returns the fitted model."""
    rng = stream(seed, purpose="toy")
    model = ToyVelocityNet(stream(seed, 1, purpose="toy"))
    opt = AdamW(model.parameters(), lr=lr)
    for step in range(steps):
        x1 = target.sample(rng, batch)
        x0 = rng.standard_normal((batch, 2))
        x1 = _ot_pairing(x0, x1)
        t = rng.uniform(0.0, 1.0, size=batch)
        xt = t[:, None] * x1 + (1.0 - t[:, None]) * x0
        v_pred = model(xt, t)
        target_v = Tensor(x1 - x0)
        diff = v_pred - target_v
        loss = (diff * diff).mean()
        model.zero_grad()
        loss.backward()
        opt.lr = cosine_lr(step, steps, lr, lr * 1e-2)
        opt.step()
    return model


def sample_toy(model, n, seed=1, steps=1):
    """Euler-integrate the learned field from Gaussian noise."""
    rng = stream(seed, 2, purpose="toy")
    x = rng.standard_normal((n, 2))
    dt = 1.0 / steps
    with no_grad():
        for i in range(steps):
            t = np.full(n, i * dt)
            x = x + model(x, t).data * dt
    return x

"""AdamW with decoupled weight decay and the cosine learning-rate schedule."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["AdamW", "cosine_lr"]


class AdamW:
    """AdamW over a list of parameters.

    Update per step, with bias-corrected moments m_hat and v_hat:

        theta <- theta - lr * weight_decay * theta - lr * m_hat / (sqrt(v_hat) + eps)

    With ``weight_decay=0`` the update is bitwise identical to plain Adam.
    """

    def __init__(self, params, lr=2e-4, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        if lr <= 0:
            raise ValueError("lr must be positive")
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.first_moment = [np.zeros_like(p.data) for p in self.params]
        self.second_moment = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.step_count += 1
        bc1 = 1.0 - self.beta1**self.step_count
        bc2 = 1.0 - self.beta2**self.step_count
        for p, m, v in zip(self.params, self.first_moment, self.second_moment):
            g = p.grad
            if g is None:
                g = np.zeros_like(p.data)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / bc1
            v_hat = v / bc2
            p.data = p.data - self.lr * self.weight_decay * p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def state_dict(self):
        return {
            "step_count": self.step_count,
            "first_moment": [m.copy() for m in self.first_moment],
            "second_moment": [v.copy() for v in self.second_moment],
        }


def cosine_lr(step, total_steps, lr_max, lr_min):
    """Cosine annealing from lr_max at step 0 to lr_min at total_steps."""
    if step < 0 or step > total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * step / total_steps))

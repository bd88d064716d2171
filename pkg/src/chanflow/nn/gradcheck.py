"""Central finite-difference verification of autodiff gradients.

Meaningful only in 64-bit: truncation error of the central difference is
O(h^2) and float32 roundoff would dominate it.
"""

from __future__ import annotations

import numpy as np

__all__ = ["finite_difference", "max_relative_error", "check_gradients"]


def finite_difference(fn, tensors, h=1e-5, entries=None, rng=None):
    """Central-difference gradients of scalar ``fn`` w.r.t. each tensor.

    fn is re-evaluated with perturbed copies of ``tensors`` (their ``data``
    mutated in place and restored). Returns one array per tensor; when
    ``entries`` is set, only that many randomly chosen entries per tensor
    are filled in, the rest are NaN.
    """
    grads = []
    picks = []
    for t in tensors:
        if t.data.dtype != np.float64:
            raise ValueError("finite differences require float64 tensors")
        if entries is None or t.data.size <= entries:
            idx = np.arange(t.data.size)
        else:
            idx = rng.choice(t.data.size, size=entries, replace=False)
        picks.append(idx)
        grads.append(np.full(t.data.size, np.nan))

    for t, idx, g in zip(tensors, picks, grads):
        flat = t.data.reshape(-1)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + h
            f_plus = float(fn().data)
            flat[i] = orig - h
            f_minus = float(fn().data)
            flat[i] = orig
            g[i] = (f_plus - f_minus) / (2.0 * h)
    return [g.reshape(t.data.shape) for t, g in zip(tensors, grads)]


def max_relative_error(analytic, numeric):
    """Max |a - n| scaled by the largest gradient magnitude of the pair."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        mask = ~np.isnan(n)
        if not mask.any():
            continue
        scale = max(np.abs(a[mask]).max(initial=0.0), np.abs(n[mask]).max(initial=0.0), 1e-8)
        worst = max(worst, float(np.abs(a[mask] - n[mask]).max() / scale))
    return worst


def check_gradients(fn, tensors, h=1e-5, entries=None, rng=None):
    """Compare reverse-mode gradients of scalar ``fn`` against central FD.

    Returns the max relative error across all checked entries.
    """
    for t in tensors:
        t.zero_grad()
    out = fn()
    out.backward()
    analytic = []
    for t in tensors:
        analytic.append(np.zeros_like(t.data) if t.grad is None else t.grad.copy())
        t.zero_grad()
    numeric = finite_difference(fn, tensors, h=h, entries=entries, rng=rng)
    return max_relative_error(analytic, numeric)

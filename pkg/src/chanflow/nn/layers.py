"""Network building blocks on top of the autodiff tensor.

Modules register parameters as attributes; ``named_parameters`` walks the
attribute tree in deterministic insertion order, which fixes checkpoint
layout and makes training runs bit-reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .tensor import Parameter, Tensor, concat, gelu, layer_norm, softmax

__all__ = [
    "Module",
    "Linear",
    "LayerNorm",
    "FeedForward",
    "MultiHeadAttention",
    "AdaptiveLayerNorm",
    "TimestepEmbedder",
    "sinusoidal_features",
]


class Module:
    """Container with deterministic parameter registration."""

    def named_parameters(self, prefix=""):
        for name, value in vars(self).items():
            key = f"{prefix}{name}"
            if isinstance(value, Parameter):
                yield key, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=f"{key}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(prefix=f"{key}.{i}.")
                    elif isinstance(item, Parameter):
                        yield f"{key}.{i}", item

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        own = dict(self.named_parameters())
        missing = set(own) - set(state)
        unexpected = set(state) - set(own)
        if missing or unexpected:
            raise ValueError(f"state dict mismatch: missing={sorted(missing)} unexpected={sorted(unexpected)}")
        for name, p in own.items():
            values = np.asarray(state[name])
            if values.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}: checkpoint {values.shape} vs model {p.data.shape}")
            p.data = values.astype(p.data.dtype)

    def num_parameters(self):
        return sum(p.size for p in self.parameters())


class Linear(Module):
    """Affine map ``x @ W + b`` with W of shape (in, out)."""

    def __init__(self, in_dim, out_dim, rng, dtype=np.float32, zero_init=False, bias=True):
        if zero_init:
            w = np.zeros((in_dim, out_dim))
        else:
            bound = math.sqrt(6.0 / (in_dim + out_dim))
            w = rng.uniform(-bound, bound, size=(in_dim, out_dim))
        self.weight = Parameter(w.astype(dtype))
        self.bias = Parameter(np.zeros(out_dim, dtype=dtype)) if bias else None

    def __call__(self, x):
        out = x @ self.weight
        if self.bias is not None:
            out = out + self.bias
        return out


class LayerNorm(Module):
    """Layer normalization over the last axis, optionally affine."""

    def __init__(self, dim, dtype=np.float32, affine=True, eps=1e-6):
        self.eps = eps
        if affine:
            self.gamma = Parameter(np.ones(dim, dtype=dtype))
            self.beta = Parameter(np.zeros(dim, dtype=dtype))
        else:
            self.gamma = None
            self.beta = None

    def __call__(self, x):
        out = layer_norm(x, eps=self.eps)
        if self.gamma is not None:
            out = out * self.gamma + self.beta
        return out


class FeedForward(Module):
    """Two-layer GELU MLP with a configurable expansion factor."""

    def __init__(self, dim, rng, dtype=np.float32, expansion=4):
        self.fc1 = Linear(dim, expansion * dim, rng, dtype)
        self.fc2 = Linear(expansion * dim, dim, rng, dtype)

    def __call__(self, x):
        return self.fc2(gelu(self.fc1(x)))


class MultiHeadAttention(Module):
    """Scaled dot-product attention with per-head projections.

    Self-attention when ``kv`` is omitted; cross-attention when queries and
    keys/values come from different sequences.
    """

    def __init__(self, dim, num_heads, rng, dtype=np.float32):
        if dim % num_heads != 0:
            raise ValueError(f"model dim {dim} not divisible by num_heads {num_heads}")
        self.num_heads = num_heads
        self.head_dim = dim // num_heads
        self.scale = 1.0 / math.sqrt(self.head_dim)
        self.wq = Linear(dim, dim, rng, dtype)
        self.wk = Linear(dim, dim, rng, dtype)
        self.wv = Linear(dim, dim, rng, dtype)
        self.wo = Linear(dim, dim, rng, dtype)

    def _split_heads(self, x):
        b, length, dim = x.shape
        return x.reshape(b, length, self.num_heads, self.head_dim).transpose(0, 2, 1, 3)

    def __call__(self, query, kv=None):
        if kv is None:
            kv = query
        if query.shape[-1] != kv.shape[-1]:
            raise ValueError(f"query dim {query.shape[-1]} != key/value dim {kv.shape[-1]}")
        b, lq, dim = query.shape
        q = self._split_heads(self.wq(query))
        k = self._split_heads(self.wk(kv))
        v = self._split_heads(self.wv(kv))
        logits = (q @ k.transpose(0, 1, 3, 2)) * self.scale
        weights = softmax(logits, axis=-1)
        out = weights @ v
        out = out.transpose(0, 2, 1, 3).reshape(b, lq, dim)
        return self.wo(out)

    def attention_weights(self, query, kv=None):
        """Softmax attention matrix, for diagnostics and tests."""
        if kv is None:
            kv = query
        q = self._split_heads(self.wq(query))
        k = self._split_heads(self.wk(kv))
        logits = (q @ k.transpose(0, 1, 3, 2)) * self.scale
        return softmax(logits, axis=-1)


class AdaptiveLayerNorm(Module):
    """Timestep-conditioned layer norm emitting (scale, shift, gate).

    The conditioning projection is zero-initialized, so at initialization
    scale = 1, shift = 0 and gate = 0: a block wrapped in this unit starts
    as an identity map.
    """

    def __init__(self, dim, cond_dim, rng, dtype=np.float32):
        self.norm = LayerNorm(dim, dtype, affine=False)
        self.proj = Linear(cond_dim, 3 * dim, rng, dtype, zero_init=True)
        self.dim = dim

    def _coefficients(self, cond):
        raw = self.proj(cond)
        b = raw.shape[0]
        raw = raw.reshape(b, 1, 3 * self.dim)
        shift = raw[:, :, : self.dim]
        scale = raw[:, :, self.dim : 2 * self.dim] + 1.0
        gate = raw[:, :, 2 * self.dim :]
        return scale, shift, gate

    def modulate(self, x, cond):
        """Return (modulated x, gate) for use around a residual sublayer."""
        scale, shift, gate = self._coefficients(cond)
        return self.norm(x) * scale + shift, gate

    def __call__(self, x, cond):
        """Gated modulated normalization: gate * (scale * norm(x) + shift)."""
        modulated, gate = self.modulate(x, cond)
        return gate * modulated


def sinusoidal_features(t, dim, max_period=10000.0):
    """Sin/cos features of a scalar-per-sample time value in [0, 1]."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64)) * 1000.0
    half = dim // 2
    freqs = np.exp(-math.log(max_period) * np.arange(half) / half)
    args = t[:, None] * freqs[None, :]
    feats = np.concatenate([np.cos(args), np.sin(args)], axis=-1)
    if dim % 2:
        feats = np.concatenate([feats, np.zeros((t.shape[0], 1))], axis=-1)
    return feats


class TimestepEmbedder(Module):
    """Sinusoidal features followed by a two-layer GELU MLP."""

    def __init__(self, dim, rng, dtype=np.float32, feature_dim=64):
        self.feature_dim = feature_dim
        self.dtype = dtype
        self.fc1 = Linear(feature_dim, dim, rng, dtype)
        self.fc2 = Linear(dim, dim, rng, dtype)

    def __call__(self, t):
        feats = sinusoidal_features(t, self.feature_dim).astype(self.dtype)
        return self.fc2(gelu(self.fc1(Tensor(feats))))

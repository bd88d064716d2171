"""Reverse-mode autodiff engine, layers, optimizer and checkpoint I/O."""

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import check_gradients, finite_difference, max_relative_error
from .layers import (
    AdaptiveLayerNorm,
    FeedForward,
    LayerNorm,
    Linear,
    Module,
    MultiHeadAttention,
    TimestepEmbedder,
    sinusoidal_features,
)
from .optim import AdamW, cosine_lr
from .tensor import Parameter, Tensor, concat, exp, gelu, layer_norm, log, no_grad, softmax

__all__ = [
    "Tensor",
    "Parameter",
    "no_grad",
    "concat",
    "exp",
    "log",
    "gelu",
    "softmax",
    "layer_norm",
    "Module",
    "Linear",
    "LayerNorm",
    "FeedForward",
    "MultiHeadAttention",
    "AdaptiveLayerNorm",
    "TimestepEmbedder",
    "sinusoidal_features",
    "AdamW",
    "cosine_lr",
    "check_gradients",
    "finite_difference",
    "max_relative_error",
    "save_checkpoint",
    "load_checkpoint",
]

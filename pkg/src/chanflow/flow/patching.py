"""3D patch tokenization of (N_r, N_t, 2*N_c) tensors.

Blocks of size (p_ant, p_ant, p_freq) are taken in row-major grid order
(receive blocks outermost, then transmit, then frequency), flattened, and
optionally projected to the model width. With the identity projection the
patch/unpatch pair is an exact bijection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import EstimationError

__all__ = ["PatchTokens", "patch_grid", "patchify", "unpatchify", "patch_tokens"]


@dataclass(frozen=True)
class PatchTokens:
    """Patch token matrix together with its block geometry."""

    tokens: np.ndarray  # (L, token_dim)
    patch_dims: tuple  # (p_ant, p_ant, p_freq)
    grid_dims: tuple  # (n1, n2, n3), L = n1*n2*n3

    @property
    def num_tokens(self):
        return self.tokens.shape[0]


def patch_grid(dims, patch):
    """Block-grid shape; raises unless every dim divides evenly."""
    if len(dims) != 3 or len(patch) != 3:
        raise EstimationError("patching expects 3-d tensors and 3-d patch sizes")
    for d, p in zip(dims, patch):
        if p < 1 or d % p != 0:
            raise EstimationError(f"patch size {patch} does not divide tensor dims {tuple(dims)}")
    return tuple(d // p for d, p in zip(dims, patch))


def patchify(x, patch):
    """Cut (..., N_r, N_t, F) into flattened non-overlapping blocks.

    Returns (..., L, p_ant*p_ant*p_freq). Works on numpy arrays and on
    autodiff tensors alike (both expose reshape/transpose).
    """
    dims = x.shape[-3:]
    n1, n2, n3 = patch_grid(dims, patch)
    p1, p2, p3 = patch
    lead = x.shape[:-3]
    x = x.reshape(*lead, n1, p1, n2, p2, n3, p3)
    k = len(lead)
    order = tuple(range(k)) + (k, k + 2, k + 4, k + 1, k + 3, k + 5)
    x = x.transpose(*order)
    return x.reshape(*lead, n1 * n2 * n3, p1 * p2 * p3)


def unpatchify(tokens, dims, patch):
    """Exact inverse of :func:`patchify` for the given tensor dims."""
    n1, n2, n3 = patch_grid(dims, patch)
    p1, p2, p3 = patch
    lead = tokens.shape[:-2]
    expected = (n1 * n2 * n3, p1 * p2 * p3)
    if tuple(tokens.shape[-2:]) != expected:
        raise EstimationError(f"token shape {tokens.shape[-2:]} does not match grid {expected}")
    x = tokens.reshape(*lead, n1, n2, n3, p1, p2, p3)
    k = len(lead)
    order = tuple(range(k)) + (k, k + 3, k + 1, k + 4, k + 2, k + 5)
    x = x.transpose(*order)
    return x.reshape(*lead, n1 * p1, n2 * p2, n3 * p3)


def patch_tokens(x, patch):
    """Spec-shaped convenience: single tensor to :class:`PatchTokens`."""
    if np.asarray(x).ndim != 3:
        raise EstimationError("patch_tokens expects a single (N_r, N_t, F) tensor")
    grid = patch_grid(x.shape, patch)
    return PatchTokens(tokens=patchify(np.asarray(x), patch), patch_dims=tuple(patch), grid_dims=grid)

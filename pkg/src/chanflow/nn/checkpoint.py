"""Checkpoint container: named parameter tensors plus a JSON config block.

Layout ("MCFW" magic, little-endian): version u32, config JSON string,
parameter count u32, then per parameter a name string, rank u32, dims u32
each, and float32 values.
"""

from __future__ import annotations

import json

import numpy as np

from .._binio import FormatError, expect_magic, read_array, read_str, read_u32, write_array, write_str, write_u32

MAGIC = b"MCFW"
VERSION = 1

__all__ = ["save_checkpoint", "load_checkpoint", "FormatError"]


def save_checkpoint(path, state, config):
    """Write named parameter arrays and a JSON-serializable config dict."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        write_u32(fh, VERSION)
        write_str(fh, json.dumps(config, sort_keys=True))
        write_u32(fh, len(state))
        for name, values in state.items():
            values = np.asarray(values, dtype=np.float32)
            write_str(fh, name)
            write_u32(fh, values.ndim)
            for dim in values.shape:
                write_u32(fh, dim)
            write_array(fh, values, np.float32)


def load_checkpoint(path):
    """Read a checkpoint; returns (state dict of float32 arrays, config dict)."""
    with open(path, "rb") as fh:
        expect_magic(fh, MAGIC)
        version = read_u32(fh)
        if version != VERSION:
            raise FormatError(f"unsupported checkpoint version {version}")
        config = json.loads(read_str(fh))
        n_params = read_u32(fh)
        state = {}
        for _ in range(n_params):
            name = read_str(fh)
            ndim = read_u32(fh)
            shape = tuple(read_u32(fh) for _ in range(ndim))
            count = 1
            for dim in shape:
                count *= dim
            state[name] = read_array(fh, count, np.float32).reshape(shape)
    return state, config

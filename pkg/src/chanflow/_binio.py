"""Shared little-endian binary container helpers for the MCF* file formats."""

from __future__ import annotations

import struct

import numpy as np


class FormatError(ValueError):
    """Raised when a container file is malformed or has the wrong magic."""


def write_u32(fh, value):
    fh.write(struct.pack("<I", value))


def read_u32(fh):
    raw = fh.read(4)
    if len(raw) != 4:
        raise FormatError("truncated file: expected u32")
    return struct.unpack("<I", raw)[0]


def write_f64(fh, value):
    fh.write(struct.pack("<d", value))


def read_f64(fh):
    raw = fh.read(8)
    if len(raw) != 8:
        raise FormatError("truncated file: expected f64")
    return struct.unpack("<d", raw)[0]


def write_str(fh, text):
    raw = text.encode("utf-8")
    write_u32(fh, len(raw))
    fh.write(raw)


def read_str(fh):
    n = read_u32(fh)
    raw = fh.read(n)
    if len(raw) != n:
        raise FormatError("truncated file: expected string payload")
    return raw.decode("utf-8")


def write_array(fh, values, dtype):
    arr = np.ascontiguousarray(values, dtype=dtype)
    fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def read_array(fh, count, dtype):
    dt = np.dtype(dtype).newbyteorder("<")
    raw = fh.read(count * dt.itemsize)
    if len(raw) != count * dt.itemsize:
        raise FormatError("truncated file: expected array payload")
    return np.frombuffer(raw, dtype=dt).astype(dtype)


def expect_magic(fh, magic):
    raw = fh.read(len(magic))
    if raw != magic:
        raise FormatError(f"bad magic: expected {magic!r}, found {raw!r}")

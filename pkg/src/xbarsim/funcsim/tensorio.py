"""Flat binary tensor container: magic, dtype, dims, scale, raw data.

Layout (little-endian):
    4 bytes   magic b"XBT1"
    1 byte    dtype code (see _DTYPES)
    1 byte    ndim
    8 bytes   float64 scale
    4 bytes per dim  uint32 sizes
    raw array bytes, C order
"""

from __future__ import annotations

import struct

import numpy as np

_MAGIC = b"XBT1"
_DTYPES = {0: np.float64, 1: np.float32, 2: np.int32, 3: np.int64, 4: np.uint8}
_CODES = {np.dtype(v): k for k, v in _DTYPES.items()}


def save_tensor(path: str, array: np.ndarray, scale: float = 1.0) -> None:
    array = np.ascontiguousarray(array)
    code = _CODES.get(array.dtype)
    if code is None:
        raise ValueError(f"unsupported dtype {array.dtype}; use one of {list(_CODES)}")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BBd", code, array.ndim, float(scale)))
        fh.write(struct.pack(f"<{array.ndim}I", *array.shape))
        fh.write(array.tobytes())


def load_tensor(path: str) -> tuple[np.ndarray, float]:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a tensor container")
        code, ndim, scale = struct.unpack("<BBd", fh.read(10))
        if code not in _DTYPES:
            raise ValueError(f"{path}: unknown dtype code {code}")
        shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
        data = fh.read()
    array = np.frombuffer(data, dtype=_DTYPES[code]).reshape(shape).copy()
    return array, scale

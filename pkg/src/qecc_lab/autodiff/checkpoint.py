"""QCKPT container: named little-endian arrays, reloaded bit-exactly.

Layout::

    b"QCKPT" u8 version u32 count
    repeated: u32 name_len, name (utf-8), u8 dtype, u32 rank, u64 dims..., payload
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

MAGIC = b"QCKPT"
VERSION = 1
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8"), 2: np.dtype("<i8"), 3: np.dtype("u1")}
_CODES = {dt: code for code, dt in _DTYPES.items()}


def _dtype_code(arr: np.ndarray) -> int:
    dt = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
    for code, known in _DTYPES.items():
        if dt == known:
            return code
    raise ValueError(f"unsupported checkpoint dtype {arr.dtype}")


def dump_arrays(arrays: dict[str, np.ndarray], fh: BinaryIO) -> None:
    fh.write(MAGIC + struct.pack("<BI", VERSION, len(arrays)))
    for name in sorted(arrays):
        arr = np.asarray(arrays[name])
        code = _dtype_code(arr)
        raw = name.encode()
        fh.write(struct.pack("<I", len(raw)) + raw)
        fh.write(struct.pack("<BI", code, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes())


def load_arrays(fh: BinaryIO) -> dict[str, np.ndarray]:
    def read(n):
        blob = fh.read(n)
        if len(blob) != n:
            raise ValueError("truncated checkpoint")
        return blob

    if read(len(MAGIC)) != MAGIC:
        raise ValueError("not a QCKPT checkpoint")
    version, count = struct.unpack("<BI", read(5))
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<I", read(4))
        name = read(nlen).decode()
        code, rank = struct.unpack("<BI", read(5))
        if code not in _DTYPES:
            raise ValueError(f"unknown dtype code {code} for {name}")
        dims = struct.unpack(f"<{rank}Q", read(8 * rank))
        dt = _DTYPES[code]
        size = int(np.prod(dims, dtype=np.int64)) if rank else 1
        arr = np.frombuffer(read(size * dt.itemsize), dtype=dt).reshape(dims)
        out[name] = arr.astype(dt.newbyteorder("="), copy=True)
    return out


def save_checkpoint(path, arrays: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        dump_arrays(arrays, fh)


def load_checkpoint(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        return load_arrays(fh)

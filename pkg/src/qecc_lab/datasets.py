"""QSYN dataset files: a fixed header followed by packed syndrome runs.

Header (little-endian)::

    b"QSYN" u8 version  16s code_hash  u8 channel  f64 p  f64 q
    u32 T  u64 count  u32 n_s  u32 n

Each record stores, per round, the syndrome and measurement-error bits
(``n_s`` each) and the fresh X and Z data errors (``n`` each), every row
packed with ``numpy.packbits(bitorder="little")``.  Channel 255 marks
externally generated records.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .codes import StabilizerCode
from .noise import RunBatch

MAGIC = b"QSYN"
VERSION = 1
_HEADER = struct.Struct("<4sB16sBddIQII")
CHANNEL_IDS = {"independent": 0, "depolarizing": 1, "external": 255}
CHANNEL_NAMES = {v: k for k, v in CHANNEL_IDS.items()}


@dataclass(frozen=True)
class DatasetHeader:
    code_hash: str
    channel: str
    p: float
    q: float
    T: int
    count: int
    n_s: int
    n: int

    def pack(self) -> bytes:
        return _HEADER.pack(MAGIC, VERSION, self.code_hash.encode().ljust(16, b"\0"),
                            CHANNEL_IDS[self.channel], self.p, self.q, self.T, self.count,
                            self.n_s, self.n)

    @classmethod
    def unpack(cls, blob: bytes) -> "DatasetHeader":
        if len(blob) < _HEADER.size:
            raise ValueError("truncated QSYN header")
        magic, version, h, ch, p, q, T, count, n_s, n = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected QSYN")
        if version != VERSION:
            raise ValueError(f"unsupported QSYN version {version}")
        if ch not in CHANNEL_NAMES:
            raise ValueError(f"unknown channel id {ch}")
        return cls(h.rstrip(b"\0").decode(), CHANNEL_NAMES[ch], p, q, T, count, n_s, n)


def _row_bytes(bits: int) -> int:
    return (bits + 7) // 8


def _pack(a: np.ndarray) -> np.ndarray:
    return np.packbits(np.asarray(a, dtype=np.uint8), axis=-1, bitorder="little")


def _unpack(a: np.ndarray, bits: int) -> np.ndarray:
    return np.unpackbits(a, axis=-1, bitorder="little", count=bits)


def encode_runs(batch: RunBatch) -> bytes:
    B = len(batch)
    parts = [_pack(batch.syndromes), _pack(batch.measurement_errors),
             _pack(batch.step_x), _pack(batch.step_z)]
    return np.concatenate([p.reshape(B, -1) for p in parts], axis=1).tobytes()


def decode_runs(blob: bytes, header: DatasetHeader) -> RunBatch:
    T, n_s, n = header.T, header.n_s, header.n
    ws, wn = _row_bytes(n_s), _row_bytes(n)
    rec = T * (2 * ws + 2 * wn)
    if len(blob) != rec * header.count:
        raise ValueError(f"QSYN payload has {len(blob)} bytes, expected {rec * header.count}")
    raw = np.frombuffer(blob, dtype=np.uint8).reshape(header.count, rec)
    cuts = np.cumsum([T * ws, T * ws, T * wn])
    s, m, x, z = np.split(raw, cuts, axis=1)
    B = header.count
    return RunBatch(
        _unpack(s.reshape(B, T, ws), n_s),
        _unpack(m.reshape(B, T, ws), n_s),
        _unpack(x.reshape(B, T, wn), n),
        _unpack(z.reshape(B, T, wn), n),
    )


def write_dataset(path, code: StabilizerCode, batch: RunBatch, channel: str,
                  p: float, q: float) -> DatasetHeader:
    header = DatasetHeader(code.code_hash, channel, float(p), float(q), batch.T, len(batch),
                           code.n_s, code.n)
    with open(path, "wb") as fh:
        fh.write(header.pack())
        fh.write(encode_runs(batch))
    return header


def read_dataset(path, code: StabilizerCode | None = None) -> tuple[DatasetHeader, RunBatch]:
    """Load a dataset; with ``code`` given, its hash must match the header."""
    with open(path, "rb") as fh:
        blob = fh.read()
    header = DatasetHeader.unpack(blob)
    if code is not None and header.code_hash != code.code_hash:
        raise ValueError(f"{path}: dataset was generated for code {header.code_hash}, "
                         f"not {code.code_hash}")
    return header, decode_runs(blob[_HEADER.size:], header)

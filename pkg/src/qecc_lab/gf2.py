"""Bit-packed linear algebra over GF(2).

Bits are packed into little-endian ``uint64`` words: bit ``i`` of a vector
lives in word ``i // 64`` at bit position ``i % 64``.  Padding bits past the
logical length are always zero, so packed buffers compare and hash exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable

import numpy as np

WORD_BITS = 64
GF2M_MAGIC = b"GF2M"
_HEADER = struct.Struct("<4sII")


def _n_words(nbits: int) -> int:
    return (nbits + WORD_BITS - 1) // WORD_BITS


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(..., nbits)`` 0/1 array into ``(..., n_words)`` uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    nbits = bits.shape[-1]
    nwords = _n_words(nbits)
    padded = np.zeros(bits.shape[:-1] + (nwords * WORD_BITS,), dtype=np.uint8)
    padded[..., :nbits] = bits & 1
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray, nbits: int) -> np.ndarray:
    words = np.ascontiguousarray(np.asarray(words, dtype="<u8"))
    as_bytes = words.view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits[..., :nbits]


@dataclass(frozen=True, eq=False)
class BitVector:
    len: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (_n_words(self.len),):
            raise ValueError("packed buffer does not match vector length")
        self.data.setflags(write=False)

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray) -> "BitVector":
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits,
                         dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("expected a 1-D bit sequence")
        return cls(arr.shape[0], pack_bits(arr))

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length, np.zeros(_n_words(length), dtype=np.uint64))

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.data, self.len)

    def weight(self) -> int:
        return int(np.bitwise_count(self.data).sum())

    def any(self) -> bool:
        return bool(self.data.any())

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return int((self.data[i // WORD_BITS] >> np.uint64(i % WORD_BITS)) & np.uint64(1))

    def __xor__(self, other: "BitVector") -> "BitVector":
        return gf2_xor_acc(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.len == other.len and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.len, self.data.tobytes()))

    def __len__(self) -> int:
        return self.len

    def __repr__(self) -> str:
        bits = "".join(str(b) for b in self.to_bits()[:80])
        return f"BitVector({bits}{'...' if self.len > 80 else ''})"


@dataclass(frozen=True, eq=False)
class BitMatrix:
    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.rows, _n_words(self.cols)):
            raise ValueError("packed buffer does not match matrix shape")
        self.data.setflags(write=False)

    @classmethod
    def from_dense(cls, dense) -> "BitMatrix":
        arr = np.asarray(dense, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D 0/1 array")
        return cls(arr.shape[0], arr.shape[1], pack_bits(arr).reshape(arr.shape[0], -1))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, _n_words(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, size: int) -> "BitMatrix":
        return cls.from_dense(np.eye(size, dtype=np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_dense(self) -> np.ndarray:
        return unpack_bits(self.data, self.cols).reshape(self.rows, self.cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.data[i].copy())

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self.data).sum(axis=1).astype(np.int64)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"

    # serialization -------------------------------------------------------

    def to_bytes(self) -> bytes:
        return _HEADER.pack(GF2M_MAGIC, self.rows, self.cols) + self.data.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "BitMatrix":
        mat, used = cls._parse(blob)
        if used != len(blob):
            raise ValueError("trailing bytes after GF2M payload")
        return mat

    @classmethod
    def _parse(cls, blob: bytes, offset: int = 0) -> tuple["BitMatrix", int]:
        if len(blob) - offset < _HEADER.size:
            raise ValueError("truncated GF2M header")
        magic, rows, cols = _HEADER.unpack_from(blob, offset)
        if magic != GF2M_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected GF2M")
        nbytes = rows * _n_words(cols) * 8
        start = offset + _HEADER.size
        if len(blob) < start + nbytes:
            raise ValueError("truncated GF2M payload")
        words = np.frombuffer(blob, dtype="<u8", count=rows * _n_words(cols), offset=start)
        data = words.astype(np.uint64).reshape(rows, _n_words(cols))
        if cols % WORD_BITS and rows and np.any(data[:, -1] >> np.uint64(cols % WORD_BITS)):
            raise ValueError("nonzero padding bits in GF2M payload")
        return cls(rows, cols, data), start + nbytes

    def write(self, fh: BinaryIO) -> None:
        fh.write(self.to_bytes())

    @classmethod
    def read(cls, fh: BinaryIO) -> "BitMatrix":
        head = fh.read(_HEADER.size)
        magic, rows, cols = _HEADER.unpack(head)
        if magic != GF2M_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected GF2M")
        body = fh.read(rows * _n_words(cols) * 8)
        return cls.from_bytes(head + body)


def gf2_matvec(M: BitMatrix, v: BitVector) -> BitVector:
    """Return ``M v`` over GF(2)."""
    if v.len != M.cols:
        raise ValueError(f"dimension mismatch: matrix has {M.cols} columns, vector length {v.len}")
    if M.rows == 0:
        return BitVector.zeros(0)
    parity = np.bitwise_count(M.data & v.data[None, :]).sum(axis=1) & 1
    return BitVector.from_bits(parity.astype(np.uint8))


def gf2_xor_acc(acc: BitVector, v: BitVector) -> BitVector:
    if acc.len != v.len:
        raise ValueError(f"length mismatch: {acc.len} vs {v.len}")
    return BitVector(acc.len, acc.data ^ v.data)


def gf2_rank(M: BitMatrix) -> int:
    """Rank over GF(2) by Gaussian elimination on a packed copy."""
    work = M.data.copy()
    rank = 0
    for col in range(M.cols):
        if rank == M.rows:
            break
        word, bit = divmod(col, WORD_BITS)
        mask = np.uint64(1) << np.uint64(bit)
        has_bit = (work[rank:, word] & mask) != 0
        hits = np.flatnonzero(has_bit)
        if hits.size == 0:
            continue
        pivot = rank + hits[0]
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        below = rank + 1 + np.flatnonzero((work[rank + 1:, word] & mask) != 0)
        work[below] ^= work[rank]
        rank += 1
    return rank


def dense_matmul_mod2(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Dense 0/1 product mod 2, exact for inner dimensions below 2**24."""
    out = np.asarray(A, dtype=np.float32) @ np.asarray(B, dtype=np.float32)
    return (out.astype(np.int64) & 1).astype(np.uint8)

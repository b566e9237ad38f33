import io

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from qecc_lab.gf2 import (BitMatrix, BitVector, dense_matmul_mod2, gf2_matvec, gf2_rank,
                          gf2_xor_acc, pack_bits, unpack_bits)

bit_arrays = hnp.arrays(np.uint8, st.integers(1, 200), elements=st.integers(0, 1))


def _rank_oracle(A):
    # Gaussian elimination on Python ints used as bitsets
    rows = [int("".join(map(str, r[::-1])) or "0", 2) for r in A.astype(int).tolist()]
    rank = 0
    while rows:
        pivot = rows.pop()
        if pivot == 0:
            continue
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
    return rank


@given(bit_arrays)
def test_pack_roundtrip(bits):
    words = pack_bits(bits)
    assert words.dtype == np.uint64
    assert np.array_equal(unpack_bits(words, bits.size), bits)


def test_pack_layout_little_endian():
    bits = np.zeros(70, dtype=np.uint8)
    bits[[0, 3, 64, 69]] = 1
    words = pack_bits(bits)
    assert words.tolist() == [0b1001, (1 << 0) | (1 << 5)]


@given(bit_arrays, st.data())
def test_xor_and_weight(a, data):
    b = data.draw(hnp.arrays(np.uint8, a.size, elements=st.integers(0, 1)))
    va, vb = BitVector.from_bits(a), BitVector.from_bits(b)
    assert np.array_equal((va ^ vb).to_bits(), a ^ b)
    assert gf2_xor_acc(va, vb) == va ^ vb
    assert va.weight() == int(a.sum())
    assert va.any() == bool(a.any())
    assert hash(va) == hash(BitVector.from_bits(a.copy()))


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        BitVector.from_bits([1, 0]) ^ BitVector.from_bits([1, 0, 1])


@given(st.integers(1, 40), st.integers(1, 130), st.integers(0, 2**32 - 1))
def test_matvec_matches_dense(rows, cols, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 2, (rows, cols), dtype=np.uint8)
    v = rng.integers(0, 2, cols, dtype=np.uint8)
    got = gf2_matvec(BitMatrix.from_dense(A), BitVector.from_bits(v)).to_bits()
    assert np.array_equal(got, (A.astype(int) @ v) % 2)


@given(st.integers(1, 30), st.integers(1, 90), st.integers(0, 2**32 - 1))
def test_matvec_linear(rows, cols, seed):
    rng = np.random.default_rng(seed)
    M = BitMatrix.from_dense(rng.integers(0, 2, (rows, cols), dtype=np.uint8))
    u = BitVector.from_bits(rng.integers(0, 2, cols, dtype=np.uint8))
    w = BitVector.from_bits(rng.integers(0, 2, cols, dtype=np.uint8))
    assert gf2_matvec(M, u ^ w) == gf2_matvec(M, u) ^ gf2_matvec(M, w)


@given(st.integers(1, 25), st.integers(1, 80), st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
def test_rank_against_oracle(rows, cols, seed, density):
    rng = np.random.default_rng(seed)
    A = (rng.random((rows, cols)) < density).astype(np.uint8)
    assert gf2_rank(BitMatrix.from_dense(A)) == _rank_oracle(A)


def test_rank_small_examples():
    assert gf2_rank(BitMatrix.identity(5)) == 5
    assert gf2_rank(BitMatrix.zeros(3, 7)) == 0
    assert gf2_rank(BitMatrix.from_dense([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 2


def test_dense_matmul_mod2():
    rng = np.random.default_rng(1)
    A = rng.integers(0, 2, (4, 9, 13), dtype=np.uint8)
    B = rng.integers(0, 2, (13, 5), dtype=np.uint8)
    assert np.array_equal(dense_matmul_mod2(A, B), (A.astype(int) @ B) % 2)


@given(st.integers(1, 20), st.integers(1, 140), st.integers(0, 2**32 - 1))
def test_matrix_serialization_roundtrip(rows, cols, seed):
    A = np.random.default_rng(seed).integers(0, 2, (rows, cols), dtype=np.uint8)
    M = BitMatrix.from_dense(A)
    assert BitMatrix.from_bytes(M.to_bytes()) == M
    fh = io.BytesIO()
    M.write(fh)
    fh.seek(0)
    back = BitMatrix.read(fh)
    assert np.array_equal(back.to_dense(), A)
    assert back.transpose().shape == (cols, rows)


def test_bad_magic_rejected():
    blob = bytearray(BitMatrix.identity(3).to_bytes())
    blob[:4] = b"XXXX"
    with pytest.raises(ValueError):
        BitMatrix.from_bytes(bytes(blob))

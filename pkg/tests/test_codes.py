import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qecc_lab.codes import (build_code, build_mask, logical_dense, logical_projection,
                            parse_code_spec, random_stabilizers, read_code_file, syndrome,
                            syndromes_dense, write_code_file)
from qecc_lab.gf2 import BitMatrix, gf2_rank
from qecc_lab.noise import PauliError


def _blocks(code):
    H = code.H_dense
    z_rows = [i for i, t in enumerate(code.check_types) if t == "Z"]
    x_rows = [i for i, t in enumerate(code.check_types) if t == "X"]
    return H[z_rows][:, :code.n], H[x_rows][:, code.n:]


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_toric_shape_weights_rank(L):
    code = build_code("toric", L)
    assert code.n == 2 * L * L
    assert code.H_dense.shape == (2 * L * L, 4 * L * L)
    assert code.n_log == 4 and code.k == 2
    for block in _blocks(code):
        assert (block.sum(axis=1) == 4).all()
        assert (block.sum(axis=0) == 2).all()
        assert gf2_rank(BitMatrix.from_dense(block)) == L * L - 1


def test_toric_two_matrix_size():
    # the smallest toric code has an 8 x 16 joint parity-check matrix
    assert build_code("toric", 2).H_dense.shape == (8, 16)


@pytest.mark.parametrize("L", [2, 3, 4, 5])
def test_surface_parameters(L):
    code = build_code("surface", L)
    assert code.n == L * L + (L - 1) ** 2
    hz, hx = _blocks(code)
    rz = gf2_rank(BitMatrix.from_dense(hz))
    rx = gf2_rank(BitMatrix.from_dense(hx))
    assert rz == hz.shape[0] and rx == hx.shape[0]
    assert code.n - rz - rx == 1
    assert code.n_log == 2


@pytest.mark.parametrize("spec", ["toric:3", "toric:4:x", "toric:4:z", "surface:3", "surface:4:x"])
def test_stabilizers_invisible(spec):
    code = parse_code_spec(spec)
    stab = random_stabilizers(code, np.random.default_rng(7), 10_000)
    assert not syndromes_dense(code, stab).any()
    assert not logical_dense(code, stab).any()


@pytest.mark.parametrize("spec", ["toric:4", "surface:3"])
def test_logicals_nontrivial(spec):
    # each logical row has an undetectable error that flips it alone
    code = parse_code_spec(spec)
    H, Lm = code.H_dense, code.logicals_dense
    stack = np.concatenate([H, Lm], axis=0)
    full = gf2_rank(BitMatrix.from_dense(stack))
    assert full == gf2_rank(BitMatrix.from_dense(H)) + code.n_log


@given(st.integers(0, 2**32 - 1))
def test_syndrome_linear(seed):
    code = build_code("toric", 3)
    rng = np.random.default_rng(seed)
    e1 = PauliError.from_dense(*rng.integers(0, 2, (2, code.n)))
    e2 = PauliError.from_dense(*rng.integers(0, 2, (2, code.n)))
    assert syndrome(code, e1 ^ e2) == syndrome(code, e1) ^ syndrome(code, e2)
    assert logical_projection(code, e1 ^ e2) == logical_projection(code, e1) ^ logical_projection(code, e2)
    dense = syndromes_dense(code, np.concatenate([e1.x_part.to_bits(), e1.z_part.to_bits()]))
    assert np.array_equal(dense, syndrome(code, e1).to_bits())


def test_single_x_error_touches_two_plaquettes():
    code = build_code("toric", 4, "x")
    for q in range(code.n):
        e = np.zeros(code.n, dtype=np.uint8)
        e[q] = 1
        assert syndromes_dense(code, e).sum() == 2


def test_sector_split_consistent():
    joint = build_code("toric", 4)
    x, z = joint.sectors()
    assert (x.n_s, x.n_err, x.n_log) == (16, 32, 2)
    assert (z.n_s, z.n_err, z.n_log) == (16, 32, 2)
    rng = np.random.default_rng(3)
    ex, ez = rng.integers(0, 2, (2, 32), dtype=np.uint8)
    s = syndromes_dense(joint, np.concatenate([ex, ez]))
    assert np.array_equal(s, np.concatenate([syndromes_dense(x, ex), syndromes_dense(z, ez)]))
    with pytest.raises(ValueError):
        x.sector_code("z")


def _mask_oracle(code):
    checks = [set(c) for c in code.check_qubits]
    n, m = code.n_err, code.n_s
    M = np.zeros((n + m, n + m), dtype=bool)
    for i, j in itertools.product(range(n), repeat=2):
        M[i, j] = i == j or any(i in c and j in c for c in checks)
    for i in range(n):
        for a in range(m):
            M[i, n + a] = M[n + a, i] = i in checks[a]
    for a, b in itertools.product(range(m), repeat=2):
        M[n + a, n + b] = a == b or bool(checks[a] & checks[b])
    return M


@pytest.mark.parametrize("spec", ["toric:2", "toric:4:x", "surface:3"])
def test_mask_matches_rule(spec):
    code = parse_code_spec(spec)
    mask = build_mask(code)
    assert np.array_equal(mask.dense, _mask_oracle(code))
    assert np.array_equal(mask.dense, mask.dense.T)


def test_mask_fraction_toric4_x():
    # derived by the explicit loop oracle: 192 of 1024 entries kept
    assert build_mask(build_code("toric", 4, "x")).unmasked_fraction() == pytest.approx(0.1875, abs=0)


def test_code_file_roundtrip(tmp_path):
    code = build_code("surface", 3)
    path = tmp_path / "s3.code"
    write_code_file(path, code)
    back, header, sections = read_code_file(path)
    assert back.code_hash == code.code_hash
    assert header["n_s"] == code.n_s
    assert sections["mask"] == build_mask(code).bits
    assert parse_code_spec(str(path)).code_hash == code.code_hash


def test_code_file_tamper_detected(tmp_path):
    path = tmp_path / "t.code"
    write_code_file(path, build_code("toric", 3))
    text, rest = path.read_bytes().split(b"\n", 1)
    rest = bytearray(rest)
    rest[20] ^= 0x01
    path.write_bytes(text + b"\n" + bytes(rest))
    with pytest.raises(ValueError):
        read_code_file(path)


@pytest.mark.parametrize("bad", ["toric", "toric:1", "klein:4", "toric:4:y"])
def test_bad_specs(bad):
    with pytest.raises(ValueError):
        parse_code_spec(bad)

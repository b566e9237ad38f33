import hashlib

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qecc_lab import _kernels
from qecc_lab.codes import build_code, logical_dense, parse_code_spec, syndromes_dense
from qecc_lab.gf2 import BitVector
from qecc_lab.mwpm import (MwpmDecoder, SectorGraph, decode_mwpm, decode_mwpm_spacetime,
                           detection_events)
from qecc_lab.noise import make_rng, sample_batch, sample_faulty_run

try:
    _kernels.get_backend("cython")
    HAVE_EXT = True
except ImportError:
    HAVE_EXT = False

SETTINGS = [(f, L, ch) for f in ("toric", "surface") for L in (3, 4, 6)
            for ch in ("independent", "depolarizing")]


@pytest.mark.parametrize("family,L,channel", SETTINGS)
def test_correction_reproduces_syndrome(family, L, channel):
    code = build_code(family, L)
    b = sample_batch(code, channel, 0.12, make_rng(L, 7), 2000)
    corr = MwpmDecoder(code)(b.syndromes)
    assert np.array_equal(syndromes_dense(code, corr), b.syndromes[:, 0])


@pytest.mark.parametrize("spec", ["toric:3", "toric:5", "surface:3", "surface:5"])
def test_single_errors_corrected(spec):
    code = parse_code_spec(spec)
    errors = np.eye(code.n_err, dtype=np.uint8)
    corr = MwpmDecoder(code).decode_batch(syndromes_dense(code, errors))
    assert not logical_dense(code, corr ^ errors).any()


def test_toric_single_error_exact():
    code = build_code("toric", 5)
    errors = np.eye(code.n_err, dtype=np.uint8)
    corr = MwpmDecoder(code).decode_batch(syndromes_dense(code, errors))
    assert np.array_equal(corr, errors)


def test_zero_syndrome_gives_identity():
    code = build_code("surface", 4)
    e = decode_mwpm(code, BitVector.zeros(code.n_s))
    assert e.weight() == 0


def test_decode_mwpm_shape_check():
    code = build_code("toric", 3)
    with pytest.raises(ValueError):
        decode_mwpm(code, np.zeros(code.n_s + 1, dtype=np.uint8))


def test_sector_graph_distances():
    g = SectorGraph.from_checks(build_code("toric", 6, "x").H_dense)
    assert not g.has_boundary
    # toroidal Manhattan distance between plaquettes on a 6 x 6 lattice
    for a in range(36):
        for b in range(36):
            dr = abs(a // 6 - b // 6)
            dc = abs(a % 6 - b % 6)
            assert g.dist[a, b] == min(dr, 6 - dr) + min(dc, 6 - dc)
            assert len(g.path(a, b)) == g.dist[a, b]
    s = build_code("surface", 4, "x")
    gs = SectorGraph.from_checks(s.H_dense)
    assert gs.has_boundary
    assert gs.bdist.min() == 1


def test_golden_corrections():
    # frozen digests of the deterministic tie-breaking
    cases = {("toric:5", "depolarizing"): "868c9c97b76d066c",
             ("surface:5", "independent"): "819c840d61e6114d"}
    for (spec, channel), digest in cases.items():
        code = parse_code_spec(spec)
        b = sample_batch(code, channel, 0.1, make_rng(42), 300)
        corr = MwpmDecoder(code).decode_batch(b.syndromes[:, 0])
        assert hashlib.sha256(corr.tobytes()).hexdigest()[:16] == digest


@pytest.mark.skipif(not HAVE_EXT, reason="compiled kernel not built")
@pytest.mark.parametrize("spec,T", [("toric:4", 1), ("toric:6", 1), ("surface:5", 1),
                                    ("toric:4", 4), ("surface:4", 3)])
def test_backends_agree(spec, T):
    code = parse_code_spec(spec)
    b = sample_batch(code, "depolarizing", 0.1, make_rng(5), 400, T=T)
    py = MwpmDecoder(code, backend="python")
    cy = MwpmDecoder(code, backend="cython")
    if T == 1:
        assert np.array_equal(py.decode_batch(b.syndromes[:, 0]), cy.decode_batch(b.syndromes[:, 0]))
    else:
        assert np.array_equal(py.decode_spacetime_batch(b.syndromes),
                              cy.decode_spacetime_batch(b.syndromes))


def test_detection_events():
    s = np.array([[1, 0, 1], [1, 1, 0], [0, 1, 0]], dtype=np.uint8)
    assert detection_events(s).tolist() == [[1, 0, 1], [0, 1, 1], [1, 0, 0]]


@pytest.mark.parametrize("spec", ["toric:4", "surface:4"])
def test_spacetime_single_round_equals_static(spec):
    code = parse_code_spec(spec)
    b = sample_batch(code, "independent", 0.1, make_rng(1), 300)
    dec = MwpmDecoder(code)
    assert np.array_equal(dec.decode_spacetime_batch(b.syndromes), dec.decode_batch(b.syndromes[:, 0]))


@given(st.integers(0, 2**31), st.integers(2, 5), st.integers(0, 4))
def test_spacetime_errors_in_one_round_equal_static(seed, T, when):
    # q = 0 and every data error in one round: events collapse to the static defects
    when = when % T
    code = build_code("toric", 4)
    rng = make_rng(seed)
    err = (rng.random(code.n_err) < 0.1).astype(np.uint8)
    cum = np.zeros((T, code.n_err), dtype=np.uint8)
    cum[when:] = err
    synd = syndromes_dense(code, cum)
    got = decode_mwpm_spacetime(code, synd)
    ref = decode_mwpm(code, synd[-1])
    assert got == ref


def test_spacetime_q0_spread_errors_can_differ():
    # q = 0 is not enough for equality when data errors land in different rounds
    code = build_code("toric", 4, "x")
    cum = np.zeros((2, 32), dtype=np.uint8)
    cum[0, 0] = 1
    cum[1, [0, 16]] = 1
    synd = syndromes_dense(code, cum)
    st_ = MwpmDecoder(code).decode_spacetime_batch(synd[None])[0]
    static = MwpmDecoder(code).decode_batch(synd[-1:])[0]
    assert np.flatnonzero(st_).tolist() == [0, 16]
    assert np.flatnonzero(static).tolist() == [3, 28]
    assert not logical_dense(code, st_ ^ static).any()


@pytest.mark.parametrize("spec", ["toric:4", "surface:4"])
def test_spacetime_q0_valid(spec):
    code = parse_code_spec(spec)
    b = sample_batch(code, "depolarizing", 0.08, make_rng(8), 500, T=4, q=0.0)
    corr = MwpmDecoder(code).decode_spacetime_batch(b.syndromes)
    assert np.array_equal(syndromes_dense(code, corr), b.syndromes[:, -1])


def test_isolated_measurement_error_ignored():
    code = build_code("toric", 4)
    synd = np.zeros((4, code.n_s), dtype=np.uint8)
    synd[1, 3] = 1  # flipped in round 2 only
    assert decode_mwpm_spacetime(code, synd).weight() == 0


def test_last_round_measurement_uses_time_boundary():
    code = build_code("toric", 4, "x")
    synd = np.zeros((3, code.n_s), dtype=np.uint8)
    synd[2, 5] = 1
    assert decode_mwpm_spacetime(code, synd).weight() == 0


def test_spacetime_accepts_runs():
    code = build_code("surface", 3)
    run = sample_faulty_run(code, 0.05, 0.02, 3, make_rng(4))
    e = decode_mwpm_spacetime(code, run)
    assert e.n == code.n
    with pytest.raises(ValueError):
        decode_mwpm_spacetime(code, np.zeros((3, code.n_s + 1), dtype=np.uint8))

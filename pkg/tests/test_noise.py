import numpy as np
import pytest
from hypothesis import given, strategies as st

from qecc_lab.codes import build_code, syndromes_dense
from qecc_lab.noise import (PauliError, RngState, make_rng, reconstruct_syndromes,
                            sample_batch, sample_error_arrays, sample_faulty_run)


def test_make_rng_streams():
    a = make_rng(5, 1, 2).random(8)
    assert np.array_equal(a, make_rng(5, 1, 2).random(8))
    assert not np.array_equal(a, make_rng(5, 1, 3).random(8))
    assert not np.array_equal(a, make_rng(6, 1, 2).random(8))


def test_rng_state_roundtrip():
    rng = make_rng(11)
    rng.random(3)
    st_ = RngState.capture(rng)
    assert np.array_equal(st_.restore().random(5), rng.random(5))


def test_depolarizing_marginals():
    x, z = sample_error_arrays(1000, "depolarizing", 0.3, make_rng(0), (200,))
    total = x.size
    only_x = ((x == 1) & (z == 0)).sum() / total
    only_z = ((x == 0) & (z == 1)).sum() / total
    y = ((x == 1) & (z == 1)).sum() / total
    for frac in (only_x, only_z, y):
        assert frac == pytest.approx(0.1, abs=0.003)


def test_independent_marginals():
    x, z = sample_error_arrays(1000, "independent", 0.2, make_rng(1), (200,))
    assert x.mean() == pytest.approx(0.2, abs=0.003)
    assert (x & z).mean() == pytest.approx(0.04, abs=0.002)


def test_rejects_bad_arguments():
    code = build_code("toric", 3)
    with pytest.raises(ValueError):
        sample_batch(code, "independent", 1.5, make_rng(0), 1)
    with pytest.raises(ValueError):
        sample_batch(code, "bitflip", 0.1, make_rng(0), 1)
    with pytest.raises(ValueError):
        sample_batch(code, "independent", 0.1, make_rng(0), 1, T=0)


def test_static_batch_syndromes():
    code = build_code("toric", 4)
    b = sample_batch(code, "depolarizing", 0.1, make_rng(2), 50)
    assert b.syndromes.shape == (50, 1, code.n_s)
    assert not b.measurement_errors.any()
    assert np.array_equal(b.syndromes[:, 0], syndromes_dense(code, code.error_dense(b.x, b.z)))


@given(st.integers(1, 6), st.floats(0.0, 0.3), st.integers(0, 2**31))
def test_faulty_run_reconstruction(T, p, seed):
    code = build_code("toric", 3, "x")
    run = sample_faulty_run(code, p, None, T, make_rng(seed))
    assert run.T == T
    assert np.array_equal(reconstruct_syndromes(code, run), run.syndromes)
    cum = run.cumulative_error
    assert isinstance(cum, PauliError)
    assert np.array_equal(cum.x_part.to_bits(), np.bitwise_xor.reduce(run.step_x, axis=0))


def test_measurement_rate_defaults_to_p():
    code = build_code("toric", 4, "x")
    b = sample_batch(code, "independent", 0.2, make_rng(3), 2000, T=3)
    assert b.measurement_errors.mean() == pytest.approx(0.2, abs=0.01)
    b0 = sample_batch(code, "independent", 0.2, make_rng(3), 10, T=3, q=0.0)
    assert not b0.measurement_errors.any()


def test_pauli_error_ops():
    e = PauliError.from_dense([1, 0, 1, 0], [1, 1, 0, 0])
    assert e.weight() == 3
    assert e.y_positions().tolist() == [0]
    assert (e ^ e) == PauliError.identity(4)

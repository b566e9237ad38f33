import numpy as np
import pytest
from hypothesis import given, strategies as st

from qecc_lab.codes import build_code
from qecc_lab.datasets import (DatasetHeader, decode_runs, encode_runs, read_dataset,
                               write_dataset)
from qecc_lab.noise import make_rng, sample_batch


@given(st.integers(1, 4), st.integers(1, 30), st.integers(0, 2**31),
       st.sampled_from(["toric:3:x", "toric:3", "surface:4"]))
def test_runs_roundtrip(T, count, seed, spec):
    from qecc_lab.codes import parse_code_spec
    code = parse_code_spec(spec)
    b = sample_batch(code, "depolarizing", 0.2, make_rng(seed), count, T=T)
    header = DatasetHeader(code.code_hash, "depolarizing", 0.2, 0.2, T, count, code.n_s, code.n)
    back = decode_runs(encode_runs(b), header)
    for f in ("syndromes", "measurement_errors", "step_x", "step_z"):
        assert np.array_equal(getattr(back, f), getattr(b, f))


def test_file_roundtrip_and_header(tmp_path):
    code = build_code("toric", 4)
    b = sample_batch(code, "independent", 0.07, make_rng(1), 25, T=3, q=0.01)
    path = tmp_path / "d.qsyn"
    written = write_dataset(path, code, b, "independent", 0.07, 0.01)
    header, back = read_dataset(path, code)
    assert header == written
    assert (header.T, header.count, header.n_s, header.n) == (3, 25, code.n_s, code.n)
    assert all(back.run(i) == b.run(i) for i in range(25))
    raw = path.read_bytes()
    assert raw[:4] == b"QSYN"


def test_wrong_code_rejected(tmp_path):
    code = build_code("toric", 3)
    path = tmp_path / "d.qsyn"
    write_dataset(path, code, sample_batch(code, "independent", 0.1, make_rng(0), 4),
                  "independent", 0.1, 0.0)
    with pytest.raises(ValueError):
        read_dataset(path, build_code("toric", 4))


def test_corrupt_files_rejected(tmp_path):
    code = build_code("toric", 3)
    path = tmp_path / "d.qsyn"
    write_dataset(path, code, sample_batch(code, "independent", 0.1, make_rng(0), 4),
                  "independent", 0.1, 0.0)
    raw = path.read_bytes()
    (tmp_path / "short").write_bytes(raw[:-1])
    with pytest.raises(ValueError):
        read_dataset(tmp_path / "short")
    (tmp_path / "magic").write_bytes(b"NOPE" + raw[4:])
    with pytest.raises(ValueError):
        read_dataset(tmp_path / "magic")
    (tmp_path / "tiny").write_bytes(raw[:10])
    with pytest.raises(ValueError):
        read_dataset(tmp_path / "tiny")

"""Fast invariant checks run by ``qecc-lab selftest``."""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from . import autodiff as ad
from .codes import (build_code, build_mask, build_toric, logical_dense, random_stabilizers,
                    syndromes_dense)
from .gf2 import BitMatrix, BitVector, gf2_matvec, gf2_rank
from .matching import DefectGraph, brute_force_min_matching, min_weight_perfect_matching
from .mwpm import MwpmDecoder
from .noise import make_rng, sample_batch
from .qecct import xor_projection


def _gf2() -> None:
    rng = make_rng(0)
    for _ in range(200):
        r, c = rng.integers(1, 9, size=2)
        M = rng.integers(0, 2, (r, c), dtype=np.uint8)
        u, v = rng.integers(0, 2, (2, c), dtype=np.uint8)
        Mb = BitMatrix.from_dense(M)
        lhs = gf2_matvec(Mb, BitVector.from_bits(u ^ v))
        rhs = gf2_matvec(Mb, BitVector.from_bits(u)) ^ gf2_matvec(Mb, BitVector.from_bits(v))
        assert lhs == rhs
        assert np.array_equal(lhs.to_bits(), (M.astype(int) @ (u ^ v)) % 2)


def _codes() -> None:
    rng = make_rng(1)
    for L in (2, 3, 4):
        code = build_toric(L)
        H = code.H_dense
        assert np.all(H.sum(axis=1) == 4)
        n_z = L * L
        assert gf2_rank(BitMatrix.from_dense(H[:n_z, :code.n])) == L * L - 1
        assert gf2_rank(BitMatrix.from_dense(H[n_z:, code.n:])) == L * L - 1
        g = random_stabilizers(code, rng, 500)
        assert not syndromes_dense(code, g).any()
        assert not logical_dense(code, g).any()
    mask = build_mask(build_toric(3)).dense
    assert np.array_equal(mask, mask.T) and mask.diagonal().all()


def _matching() -> None:
    rng = make_rng(2)
    for _ in range(100):
        n = 2 * int(rng.integers(1, 4))
        W = rng.integers(0, 20, (n, n))
        W = np.triu(W, 1)
        W = W + W.T
        m = min_weight_perfect_matching(DefectGraph(W))
        assert m.total_weight == brute_force_min_matching(W)[1]


def _mwpm() -> None:
    for family in ("toric", "surface"):
        code = build_code(family, 4)
        batch = sample_batch(code, "depolarizing", 0.1, make_rng(3), 300)
        corr = MwpmDecoder(code).decode_batch(batch.syndromes[:, 0])
        assert np.array_equal(syndromes_dense(code, corr), batch.syndromes[:, 0])


def _autodiff() -> None:
    Lm = np.array([[1, 0, 1], [0, 1, 1]], dtype=np.uint8)
    for bits in itertools.product((0, 1), repeat=3):
        x = ad.Tensor(np.array(bits, dtype=np.float64))
        assert np.array_equal(xor_projection(Lm, x).data, (Lm @ np.array(bits)) % 2)
    w = ad.Tensor(np.array([1.0, 2.0]), requires_grad=True)
    (w * w).sum().backward()
    assert np.array_equal(w.grad, [2.0, 4.0])


SUITES: dict[str, Callable[[], None]] = {
    "gf2": _gf2,
    "codes": _codes,
    "matching": _matching,
    "mwpm": _mwpm,
    "autodiff": _autodiff,
}


def run_selftest(report: Callable[[str], None] = print) -> bool:
    ok = True
    for name, fn in SUITES.items():
        try:
            fn()
            report(f"PASS {name}")
        except AssertionError as exc:
            ok = False
            report(f"FAIL {name} {exc}")
    return ok

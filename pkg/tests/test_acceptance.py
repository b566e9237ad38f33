"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in an "acceptance criteria" block at the end of the
pytest run.  Criteria 4, 5 and 9 are long Monte-Carlo and training runs
(minutes to tens of minutes on one core).
"""

import itertools
import math
import os
import time

import numpy as np
import pytest

from qecc_lab import _kernels
from qecc_lab import autodiff as ad
from qecc_lab.autodiff import Tensor
from qecc_lab.cli import main
from qecc_lab.codes import (build_code, logical_dense, parse_code_spec, random_stabilizers,
                            syndromes_dense)
from qecc_lab.evaluate import estimate_threshold, evaluate
from qecc_lab.gf2 import BitMatrix, gf2_rank
from qecc_lab.manifest import manifest_path
from qecc_lab.matching import brute_force_min_matching
from qecc_lab.mwpm import MwpmDecoder
from qecc_lab.noise import make_rng, sample_batch
from qecc_lab.qecct import QecctConfig, QecctModel, total_loss, xor_projection
from qecc_lab.train import TrainConfig, model_decoder, train

from gradcheck import check_grads, model_grad_errors


# 1 ---------------------------------------------------------------------------


def test_01_gf2_code_invariants(acceptance):
    t0 = time.perf_counter()
    problems = []
    rng = np.random.default_rng(1)
    for spec in ("toric:3", "toric:4", "toric:5", "toric:6", "surface:3", "surface:5"):
        code = parse_code_spec(spec)
        H = code.H_dense
        e1 = rng.integers(0, 2, (200, code.n_err), dtype=np.uint8)
        e2 = rng.integers(0, 2, (200, code.n_err), dtype=np.uint8)
        if not np.array_equal(syndromes_dense(code, e1 ^ e2),
                              syndromes_dense(code, e1) ^ syndromes_dense(code, e2)):
            problems.append(f"{spec} linearity")
        stab = random_stabilizers(code, make_rng(0), 10_000)
        if syndromes_dense(code, stab).any() or logical_dense(code, stab).any():
            problems.append(f"{spec} stabilizer visible")
        if code.family == "toric":
            L = code.L
            for name, rows, cols in (("Z", slice(0, L * L), slice(0, code.n)),
                                     ("X", slice(L * L, 2 * L * L), slice(code.n, 2 * code.n))):
                block = H[rows, cols]
                if not ((block.sum(1) == 4).all() and (block.sum(0) == 2).all()):
                    problems.append(f"{spec} {name} weights")
                if gf2_rank(BitMatrix.from_dense(block)) != L * L - 1:
                    problems.append(f"{spec} {name} rank")
    dt = time.perf_counter() - t0
    ok = not problems and dt < 60
    acceptance("#1 GF(2)/code invariants", ok, f"{len(problems)} violations {problems[:3]}, {dt:.1f}s")
    assert ok


# 2 ---------------------------------------------------------------------------


def test_02_matching_exactness(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    backends = ["python"] + (["cython"] if _kernels.IMPLEMENTATION == "cython" else [])
    mismatches, feasible = 0, 0
    for _ in range(1000):
        n = 2 * int(rng.integers(1, 5))
        W = np.full((n, n), -1, dtype=np.int64)
        for i, j in itertools.combinations(range(n), 2):
            if rng.random() < 0.85:
                W[i, j] = W[j, i] = rng.integers(0, 30)
        ref = brute_force_min_matching(W)
        for b in backends:
            kern = _kernels.get_backend(b)
            if ref is None:
                try:
                    kern.min_weight_perfect_matching(W)
                    mismatches += 1
                except ValueError:
                    pass
                continue
            mate = kern.min_weight_perfect_matching(W)
            total = sum(int(W[i, mate[i]]) for i in range(n) if i < mate[i])
            mismatches += total != ref[1]
        feasible += ref is not None
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 60
    acceptance("#2 blossom == brute force", ok,
               f"{mismatches} mismatches over 1000 graphs ({feasible} with a perfect matching), "
               f"backends {backends}, {dt:.1f}s")
    assert ok


# 3 ---------------------------------------------------------------------------


def test_03_mwpm_validity(acceptance):
    t0 = time.perf_counter()
    bad = {}
    for family, channel in itertools.product(("toric", "surface"), ("independent", "depolarizing")):
        code = build_code(family, 5)
        b = sample_batch(code, channel, 0.12, make_rng(3, len(bad)), 10_000)
        corr = MwpmDecoder(code)(b.syndromes)
        bad[f"{family}/{channel}"] = int((syndromes_dense(code, corr) != b.syndromes[:, 0]).any(1).sum())
    dt = time.perf_counter() - t0
    ok = not any(bad.values()) and dt < 300
    acceptance("#3 MWPM syndrome validity", ok, f"invalid corrections per 10^4: {bad}, {dt:.1f}s")
    assert ok


# 4, 5 ------------------------------------------------------------------------


def _threshold(sector, channel, ps, n=100_000):
    curves, rows = {}, []
    for L in (4, 6, 8):
        code = build_code("toric", L, sector)
        rep = evaluate("mwpm", code, channel, ps, n, seed=L)
        curves[L] = rep.curves()[("mwpm", L)]
        rows.extend(rep.rows)
    return estimate_threshold(curves), rows


def test_04_mwpm_depolarizing_threshold(acceptance):
    ps = [0.13, 0.14, 0.15, 0.16, 0.17, 0.18, 0.19]
    res, _ = _threshold("xz", "depolarizing", ps)
    ok = res.found and abs(res.threshold - 0.157) <= 0.015
    acceptance("#4 MWPM depolarizing threshold", ok,
               f"crossing {res.threshold:.4f} (spread {res.spread:.4f}); target 0.157 +- 0.015"
               if res.found else "no crossing found")
    assert ok


def test_05_mwpm_independent_threshold(acceptance):
    ps = [0.08, 0.09, 0.10, 0.11, 0.12, 0.13]
    res, _ = _threshold("x", "independent", ps)
    ok = res.found and 0.09 <= res.threshold <= 0.115
    acceptance("#5 MWPM independent threshold", ok,
               f"crossing {res.threshold:.4f} (spread {res.spread:.4f}); target [0.09, 0.115]"
               if res.found else "no crossing found")
    assert ok


# 6 ---------------------------------------------------------------------------


def test_06_xor_projection(acceptance):
    t0 = time.perf_counter()
    wrong, checked = 0, 0
    rng = np.random.default_rng(6)
    for c in range(1, 7):
        X = np.array(list(itertools.product((0, 1), repeat=c)), dtype=np.float64)
        # every possible row at once: each output row only reads its own row of L
        all_rows = np.array(list(itertools.product((0, 1), repeat=c)), dtype=np.uint8)
        got = xor_projection(all_rows, Tensor(X)).data
        wrong += int((got != (X.astype(int) @ all_rows.T.astype(int)) % 2).sum())
        for r in range(1, 5):
            if r * c <= 16:
                mats = np.array(list(itertools.product((0, 1), repeat=r * c)), dtype=np.uint8)
            else:
                mats = rng.integers(0, 2, (20_000, r * c), dtype=np.uint8)
            mats = mats.reshape(-1, r, c)
            stacked = mats.reshape(-1, c)
            got = xor_projection(stacked, Tensor(X)).data.reshape(len(X), -1, r)
            ref = (np.einsum("xc,mrc->xmr", X.astype(np.int64), mats.astype(np.int64)) % 2)
            wrong += int((got != ref).sum())
            checked += len(mats)
    worst = 0.0
    for seed in range(40):
        g = np.random.default_rng(seed)
        r, c = int(g.integers(1, 5)), int(g.integers(1, 7))
        Lm = g.integers(0, 2, (r, c))
        x = g.uniform(0.1, 0.9, (4, c))
        w = g.normal(size=(4, r))
        worst = max(worst, check_grads(lambda t: ad.tsum(xor_projection(Lm, t) * w), [x], floor=1e-6))
    dt = time.perf_counter() - t0
    ok = wrong == 0 and worst <= 1e-6 and dt < 60
    acceptance("#6 differentiable XOR", ok,
               f"{wrong} wrong bits over {checked} matrices (all shapes up to 4x6, exhaustive x); "
               f"worst gradient rel. err {worst:.2e}; {dt:.1f}s")
    assert ok


# 7 ---------------------------------------------------------------------------


def test_07_full_model_gradient(acceptance):
    t0 = time.perf_counter()
    code = build_code("toric", 4, "x")
    model = QecctModel(code, QecctConfig(N=2, d=16, heads=2, dtype="float64"), seed=7)
    b = sample_batch(code, "independent", 0.1, make_rng(7), 2, T=2)
    truth = code.error_dense(b.x, b.z)
    errors = model_grad_errors(model.params, lambda: total_loss(model, model.forward(b.syndromes), truth)[0])
    worst = max(errors, key=errors.get)
    dt = time.perf_counter() - t0
    ok = errors[worst] <= 1e-4 and dt < 300
    acceptance("#7 full-model gradient check", ok,
               f"{model.n_parameters()} parameters in {len(errors)} tensors, worst rel. err "
               f"{errors[worst]:.2e} ({worst}), {dt:.1f}s")
    assert ok


# 8 ---------------------------------------------------------------------------


def test_08_pooling_invariance(acceptance):
    code = build_code("toric", 4, "x")
    model = QecctModel(code, QecctConfig(N=2, d=32, heads=4), seed=8)
    rng = np.random.default_rng(8)
    s = rng.integers(0, 2, (16, 4, code.n_s))
    base = model.forward(s).noise_logits.data
    worst = max(float(np.max(np.abs(model.forward(s[:, list(perm)]).noise_logits.data - base)))
                for perm in itertools.permutations(range(4)))
    one = s[:, :1]
    pooled = model.forward(one).noise_logits.data
    h, _ = model._embed_input(one.astype(np.float32))
    x = ad.reshape(h, (16, model.seq, 1)) * model.embedding
    for layer in model.layers:
        x = model.block(x, layer)
    x = ad.layer_norm(x, *model.final_ln)
    unpooled = ad.linear(ad.reshape(ad.linear(x, *model.head1), (16, model.seq)), *model.head2).data
    identical = pooled.tobytes() == unpooled.tobytes()
    ok = worst <= 1e-6 and identical
    acceptance("#8 pooling invariance", ok,
               f"max deviation over all 24 orders of T=4: {worst:.1e}; T=1 bit-identical: {identical}")
    assert ok


# 9 ---------------------------------------------------------------------------

TOY = dict(code="toric:4:x", channel="independent", p_min=0.06, p_max=0.10, batch_size=128,
           steps_per_epoch=3000, epochs=1, seed=0, lr0=1e-3, log_every=500)
TOY_MODEL = dict(N=2, d=32, heads=4)
EVAL_P, EVAL_N, EVAL_SEED = 0.08, 10_000, 123
VARIANTS = {
    "full": {},
    "no_g": {"use_g_omega": False},
    "ber_only": {"lambda_ler": 0.0, "lambda_g": 0.0},
    "unmasked": {"use_mask": False},
}


@pytest.fixture(scope="module")
def toy_runs():
    """Train each variant once at the same step budget; evaluate on shared samples."""
    code = build_code("toric", 4, "x")
    rows = {}
    for name, kw in VARIANTS.items():
        res = train(TrainConfig(**TOY), QecctConfig(**TOY_MODEL, **kw))
        rows[name] = evaluate(model_decoder(res.model), code, "independent", [EVAL_P], EVAL_N,
                              seed=EVAL_SEED, name=name).rows[0]
    for name in ("identity", "mwpm"):
        rows[name] = evaluate(name, code, "independent", [EVAL_P], EVAL_N, seed=EVAL_SEED).rows[0]
    return rows


def _fmt(r):
    return f"{r.ler:.4f} [{r.ler_lo:.4f}, {r.ler_hi:.4f}]"


def test_09a_toy_training_beats_baselines(acceptance, toy_runs):
    full, ident, mw = toy_runs["full"], toy_runs["identity"], toy_runs["mwpm"]
    ok = full.ler < 0.5 * ident.ler and full.ler < 3 * mw.ler
    acceptance("#9a QECCT vs identity/MWPM", ok,
               f"QECCT {_fmt(full)}, identity {_fmt(ident)}, MWPM {_fmt(mw)}; "
               f"need < {0.5 * ident.ler:.4f} and < {3 * mw.ler:.4f}")
    assert ok


@pytest.mark.parametrize("better,worse,label", [
    ("full", "no_g", "with g_omega < constant ones"),
    ("full", "ber_only", "combined loss < BER-only"),
    ("full", "unmasked", "masked < unmasked"),
])
def test_09b_ablation_directions(acceptance, toy_runs, better, worse, label):
    a, b = toy_runs[better], toy_runs[worse]
    ok = a.ler_hi < b.ler_lo
    acceptance(f"#9b {label}", ok, f"{better} {_fmt(a)} vs {worse} {_fmt(b)} "
               f"(needs non-overlapping 95% intervals)")
    assert ok


# 10 --------------------------------------------------------------------------


def test_10_reproducibility(acceptance, tmp_path, capsys):
    cfg = tmp_path / "toy.ini"
    cfg.write_text("[code]\nspec = toric:4:x\n[model]\nN = 2\nd = 16\nheads = 2\ndtype = float32\n"
                   "[training]\nbatch_size = 32\nsteps_per_epoch = 120\nlog_every = 10\n")
    run = str(tmp_path / "run")
    results = {}
    assert main(["train", "--config", str(cfg), "--out-dir", run, "--seed", "10"]) == 0
    ckpt = os.path.join(run, "model.qckpt")
    results["train"] = main(["replay", manifest_path(ckpt)]) == 0
    ev = str(tmp_path / "ev.csv")
    assert main(["eval", "--decoder", "qecct", "--checkpoint", ckpt, "--p", "0.06", "0.1",
                 "--samples", "3000", "--seed", "4", "--out", ev]) == 0
    results["eval qecct"] = main(["replay", manifest_path(ev)]) == 0
    mw = str(tmp_path / "mw.csv")
    assert main(["eval", "--decoder", "mwpm", "--code", "toric:5", "--channel", "depolarizing",
                 "--p", "0.1", "--samples", "5000", "--workers", "2", "--out", mw]) == 0
    results["eval mwpm"] = main(["replay", manifest_path(mw)]) == 0
    ds = str(tmp_path / "d.qsyn")
    assert main(["sample", "--code", "toric:4", "--channel", "independent", "--p", "0.05",
                 "--T", "3", "--n-samples", "4500", "--seed", "3", "--out", ds]) == 0
    results["sample"] = main(["replay", manifest_path(ds)]) == 0
    out = capsys.readouterr().out
    ok = all(results.values()) and "MISMATCH" not in out
    acceptance("#10 manifest replay", ok, ", ".join(f"{k}: {'bit-identical' if v else 'DIFFERS'}"
                                                     for k, v in results.items()))
    assert ok

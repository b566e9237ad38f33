"""Compare the compiled and pure-Python matching kernels.

    python benchmarks/bench_kernels.py [--samples 2000]

Reports per-matching time on random dense graphs and per-sample MWPM decode
time on toric codes, and checks that both kernels return identical output.
"""

import argparse
import time

import numpy as np

from qecc_lab._kernels import get_backend
from qecc_lab.codes import build_code
from qecc_lab.mwpm import MwpmDecoder
from qecc_lab.noise import make_rng, sample_batch


def _time(fn, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = fn()
    return (time.perf_counter() - t0) / repeat, out


def bench_matching(sizes=(10, 20, 40), repeat=20):
    rng = np.random.default_rng(0)
    fast, pure = get_backend("cython"), get_backend("python")
    print(f"{'nodes':>6} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    for n in sizes:
        W = rng.integers(1, 100, (n, n))
        W = W + W.T
        tf, mf = _time(lambda: fast.min_weight_perfect_matching(W), repeat)
        tp, mp = _time(lambda: pure.min_weight_perfect_matching(W), max(1, repeat // 4))
        assert np.array_equal(mf, mp)
        print(f"{n:>6} {tf * 1e3:>10.3f} {tp * 1e3:>10.3f} {tp / tf:>8.1f}")


def bench_decode(samples, Ls=(4, 6, 8), p=0.1):
    print(f"\n{'code':>12} {'cython us':>10} {'python us':>10} {'speedup':>8}")
    for L in Ls:
        code = build_code("toric", L)
        s = sample_batch(code, "depolarizing", p, make_rng(1), samples).syndromes[:, 0]
        fast = MwpmDecoder(code, backend="cython")
        pure = MwpmDecoder(code, backend="python")
        small = max(1, samples // 10)
        tf, cf = _time(lambda: fast.decode_batch(s), 1)
        tp, cp = _time(lambda: pure.decode_batch(s[:small]), 1)
        assert np.array_equal(cf[:small], cp)
        uf, up = tf / samples * 1e6, tp / small * 1e6
        print(f"{code.name:>12} {uf:>10.1f} {up:>10.1f} {up / uf:>8.1f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=2000)
    args = ap.parse_args()
    bench_matching()
    bench_decode(args.samples)

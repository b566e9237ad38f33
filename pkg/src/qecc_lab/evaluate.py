"""Monte-Carlo BER/LER campaigns, Wilson intervals and threshold crossings."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .codes import StabilizerCode, logical_dense, parse_code_spec
from .noise import sample_batch, make_rng

Decoder = Callable[[np.ndarray], np.ndarray]
CHUNK = 2000


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes out of ``n``."""
    if n <= 0:
        return 0.0, 1.0
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = k / n
    denom = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # rounding can leave the bound a hair inside k/n at k = 0 or k = n
    return max(0.0, min(centre - half, phat)), min(1.0, max(centre + half, phat))


@dataclass
class ReportRow:
    decoder: str
    code: str
    L: int
    channel: str
    p: float
    T: int
    q: float
    samples: int
    bit_errors: int
    bits: int
    failures: int
    ber: float = field(init=False)
    ler: float = field(init=False)
    ler_lo: float = field(init=False)
    ler_hi: float = field(init=False)
    seconds: float = field(default=0.0, compare=False)

    def __post_init__(self):
        self.ber = self.bit_errors / self.bits if self.bits else 0.0
        self.ler = self.failures / self.samples if self.samples else 0.0
        self.ler_lo, self.ler_hi = wilson_interval(self.failures, self.samples)


CSV_FIELDS = ("decoder", "code", "L", "channel", "p", "T", "q", "samples", "bit_errors", "bits",
              "failures", "ber", "ler", "ler_lo", "ler_hi")
_INT_FIELDS = {"L", "T", "samples", "bit_errors", "bits", "failures"}
_FLOAT_FIELDS = {"p", "q", "ber", "ler", "ler_lo", "ler_hi"}


@dataclass
class DecodeReport:
    """Per-``p`` metrics of one decoder on one code.

    The CSV form omits wall-clock time so reruns produce identical bytes;
    timings travel in the run manifest instead.
    """

    rows: list[ReportRow]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_FIELDS)
            for r in self.rows:
                w.writerow([repr(getattr(r, f)) if f in _FLOAT_FIELDS else getattr(r, f)
                            for f in CSV_FIELDS])

    @classmethod
    def from_csv(cls, path) -> "DecodeReport":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_FIELDS:
                raise ValueError(f"{path}: CSV header does not match the report schema")
            rows = []
            for rec in reader:
                kw = {k: (int(v) if k in _INT_FIELDS else float(v) if k in _FLOAT_FIELDS else v)
                      for k, v in rec.items()}
                derived = {k: kw.pop(k) for k in ("ber", "ler", "ler_lo", "ler_hi")}
                row = ReportRow(**kw)
                for k, v in derived.items():
                    if getattr(row, k) != v:
                        raise ValueError(f"{path}: inconsistent {k} for p={row.p}")
                rows.append(row)
        return cls(rows)

    def curves(self) -> dict[tuple[str, int], tuple[np.ndarray, np.ndarray]]:
        """``(decoder, L) -> (p, LER)`` sorted by ``p``."""
        out: dict = {}
        for r in self.rows:
            out.setdefault((r.decoder, r.L), []).append((r.p, r.ler))
        return {k: tuple(np.array(v) for v in zip(*sorted(pts))) for k, pts in out.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecodeReport):
            return NotImplemented
        strip = lambda rows: [[getattr(r, f) for f in CSV_FIELDS] for r in rows]
        return strip(self.rows) == strip(other.rows)


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("QECC_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _chunk_counts(code: StabilizerCode, decoder: Decoder, channel: str, p: float, T: int,
                  q: float | None, seed: int, p_index: int, chunk_index: int,
                  size: int) -> tuple[int, int, int]:
    rng = make_rng(seed, p_index, chunk_index)
    batch = sample_batch(code, channel, p, rng, size, T=T, q=q)
    truth = code.error_dense(batch.x, batch.z)
    pred = np.asarray(decoder(batch.syndromes), dtype=np.uint8)
    diff = pred ^ truth
    failures = int(logical_dense(code, diff).any(axis=1).sum())
    return int(diff.sum()), diff.size, failures


def _chunks(n_samples: int, chunk: int) -> list[tuple[int, int]]:
    return [(i, min(chunk, n_samples - i * chunk)) for i in range((n_samples + chunk - 1) // chunk)]


def _run_shard(args):
    code_spec, decoder_factory, channel, p, T, q, seed, p_index, jobs = args
    code = parse_code_spec(code_spec)
    decoder = decoder_factory(code)
    totals = np.zeros(3, dtype=np.int64)
    for ci, size in jobs:
        totals += _chunk_counts(code, decoder, channel, p, T, q, seed, p_index, ci, size)
    return totals


def evaluate(decoder: Decoder | str, code: StabilizerCode, channel: str, p_list: Sequence[float],
             n_samples: int, seed: int, T: int = 1, q: float | None = None,
             name: str | None = None, chunk: int = CHUNK, workers: int | None = 1,
             decoder_factory: Callable[[StabilizerCode], Decoder] | None = None) -> DecodeReport:
    """Monte-Carlo BER/LER per physical error rate.

    Samples come in fixed-size chunks, chunk ``c`` of rate index ``i`` drawing
    from stream ``(seed, i, c)``; counts therefore do not depend on how chunks
    are spread over workers.  Parallel runs need a picklable
    ``decoder_factory`` building the decoder inside each worker.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if isinstance(decoder, str):
        name = name or decoder
        decoder_factory = decoder_factory or BUILTIN_DECODERS[decoder]
        decoder = decoder_factory(code)
    workers = worker_count(workers)
    rows = []
    for i, p in enumerate(p_list):
        t0 = time.perf_counter()
        jobs = _chunks(n_samples, chunk)
        if workers > 1 and decoder_factory is not None and len(jobs) > 1:
            shards = [jobs[w::workers] for w in range(workers)]
            args = [(code.name, decoder_factory, channel, p, T, q, seed, i, s) for s in shards if s]
            with ProcessPoolExecutor(max_workers=len(args)) as pool:
                totals = sum(pool.map(_run_shard, args))
        else:
            totals = np.zeros(3, dtype=np.int64)
            for ci, size in jobs:
                totals += _chunk_counts(code, decoder, channel, p, T, q, seed, i, ci, size)
        eff_q = (p if T > 1 else 0.0) if q is None else q
        rows.append(ReportRow(name or "decoder", code.family, code.L, channel, float(p), T,
                              float(eff_q), n_samples, int(totals[0]), int(totals[1]),
                              int(totals[2]), seconds=time.perf_counter() - t0))
    return DecodeReport(rows)


# built-in decoders -------------------------------------------------------


def identity_decoder(code: StabilizerCode) -> Decoder:
    return lambda s: np.zeros((s.shape[0], code.n_err), dtype=np.uint8)


def mwpm_decoder(code: StabilizerCode) -> Decoder:
    from .mwpm import MwpmDecoder
    return MwpmDecoder(code)


BUILTIN_DECODERS: dict[str, Callable[[StabilizerCode], Decoder]] = {
    "identity": identity_decoder,
    "mwpm": mwpm_decoder,
}


# thresholds -------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    found: bool
    threshold: float | None
    spread: float | None
    crossings: tuple[tuple[int, int, float], ...] = ()

    def __str__(self) -> str:
        if not self.found:
            return "no threshold found"
        return f"threshold {self.threshold:.4f} (spread {self.spread:.4f})"


def _pair_crossings(pa, la, pb, lb) -> list[float]:
    lo, hi = max(pa.min(), pb.min()), min(pa.max(), pb.max())
    if lo >= hi:
        return []
    grid = np.unique(np.concatenate([pa, pb]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    if grid.size < 2:
        return []
    da = np.interp(grid, pa, np.log(la))
    db = np.interp(grid, pb, np.log(lb))
    d = da - db
    out = []
    for k in range(grid.size):
        if d[k] == 0:
            out.append(float(grid[k]))
        elif k + 1 < grid.size and d[k] * d[k + 1] < 0:
            t = d[k] / (d[k] - d[k + 1])
            out.append(float(grid[k] + t * (grid[k + 1] - grid[k])))
    return out


def estimate_threshold(curves: dict[int, tuple[Sequence[float], Sequence[float]]]) -> ThresholdResult:
    """Median pairwise crossing of ``log LER(p)`` curves, one per lattice size.

    Points with zero LER are dropped (their log is undefined).  Returns a
    result with ``found=False`` when no pair of curves crosses.
    """
    if len(curves) < 2:
        raise ValueError("need curves for at least two lattice sizes")
    clean = {}
    for L, (ps, lers) in curves.items():
        ps, lers = np.asarray(ps, dtype=float), np.asarray(lers, dtype=float)
        order = np.argsort(ps)
        ps, lers = ps[order], lers[order]
        keep = lers > 0
        if keep.sum() < 3:
            raise ValueError(f"curve for L={L} needs at least 3 points with nonzero LER")
        clean[L] = (ps[keep], lers[keep])
    sizes = sorted(clean)
    found = []
    for a in range(len(sizes)):
        for b in range(a + 1, len(sizes)):
            La, Lb = sizes[a], sizes[b]
            for x in _pair_crossings(*clean[La], *clean[Lb]):
                found.append((La, Lb, x))
    if not found:
        return ThresholdResult(False, None, None, ())
    xs = np.array([c[2] for c in found])
    return ThresholdResult(True, float(np.median(xs)), float(xs.max() - xs.min()), tuple(found))

"""``qecc-lab`` command-line entry point.

Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _probabilities(values: list[str]) -> list[float]:
    out = []
    for v in values:
        out.extend(float(x) for x in v.replace(",", " ").split())
    return out


# commands ------------------------------------------------------------------


def cmd_code(args, argv) -> int:
    from .codes import build_code, code_header, parse_code_spec, write_code_file
    if args.code_cmd == "export":
        code = build_code(args.family, args.L, args.sector)
        write_code_file(args.out, code)
        print(f"wrote {code.name}: n={code.n} n_s={code.n_s} H {code.n_s}x{code.n_err} -> {args.out}")
        return 0
    code = parse_code_spec(args.code)
    header = code_header(code)
    for key in ("family", "L", "sector", "n", "n_s", "n_err", "n_log", "hash"):
        print(f"{key}: {header[key]}")
    return 0


def _sample_chunks(code, channel, p, T, q, n, seed):
    from .evaluate import CHUNK, _chunks
    from .noise import RunBatch, make_rng, sample_batch
    parts = [sample_batch(code, channel, p, make_rng(seed, 0, ci), size, T=T, q=q)
             for ci, size in _chunks(n, CHUNK)]
    return RunBatch(*(np.concatenate([getattr(b, f) for b in parts]) for f in
                      ("syndromes", "measurement_errors", "step_x", "step_z")))


def cmd_sample(args, argv) -> int:
    from .codes import parse_code_spec
    from .datasets import write_dataset
    from .manifest import write_manifest
    code = parse_code_spec(args.code)
    q = args.q if args.q is not None else (args.p if args.T > 1 else 0.0)
    batch = _sample_chunks(code, args.channel, args.p, args.T, q, args.n_samples, args.seed)
    write_dataset(args.out, code, batch, args.channel, args.p, q)
    write_manifest(args.out, argv, seed=args.seed, code_hash=code.code_hash)
    print(f"wrote {len(batch)} runs (T={args.T}) for {code.name} -> {args.out}")
    return 0


def cmd_decode(args, argv) -> int:
    from .codes import logical_dense, parse_code_spec
    from .datasets import read_dataset
    from .manifest import write_manifest
    from .mwpm import MwpmDecoder
    code = parse_code_spec(args.code)
    header, batch = read_dataset(args.dataset, code)
    dec = MwpmDecoder(code)
    corr = dec(batch.syndromes)
    truth = code.error_dense(batch.x, batch.z)
    residual = logical_dense(code, corr ^ truth)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("sample", "correction_weight", "logical_class", "failure"))
        for i in range(len(batch)):
            cls = "".join(str(int(b)) for b in residual[i])
            w.writerow((i, int(corr[i].sum()), cls, int(residual[i].any())))
    write_manifest(args.out, argv, code_hash=code.code_hash)
    print(f"decoded {len(batch)} runs, LER {residual.any(axis=1).mean():.6f} -> {args.out}")
    return 0


def cmd_train(args, argv) -> int:
    from .codes import parse_code_spec
    from .config import RunConfig
    from .manifest import write_manifest
    from .train import train
    cfg_file = RunConfig.load(args.config)
    cfg = cfg_file.train_config()
    if args.seed is not None:
        cfg.seed = args.seed
    model_cfg = cfg_file.model_config()
    if os.path.exists(os.path.join(args.out_dir, "metrics.csv")) and not args.resume_log:
        raise RuntimeError(f"{args.out_dir} already holds a metrics log; pick a fresh directory")

    def progress(row):
        print(f"step {row['step']:6d} loss {row['loss']:.5f} ber {row['ber']:.5f} "
              f"ler {row['ler']:.5f} |g| {row['grad_norm']:.4f} lr {row['lr']:.2e}", flush=True)

    result = train(cfg, model_cfg, out_dir=args.out_dir, callback=progress)
    outputs = [result.checkpoint, os.path.join(args.out_dir, "metrics.csv")]
    write_manifest(result.checkpoint, argv, seed=cfg.seed,
                   code_hash=parse_code_spec(cfg.code).code_hash,
                   config_text=cfg_file.text, outputs=outputs)
    print(f"checkpoint -> {result.checkpoint}")
    return 0


def cmd_eval(args, argv) -> int:
    from .codes import parse_code_spec
    from .evaluate import evaluate
    from .manifest import write_manifest
    from .train import load_model, model_decoder
    if args.decoder in ("qecct", "mlp"):
        if not args.checkpoint:
            raise UsageError("--checkpoint is required for neural decoders")
        model, tcfg = load_model(args.checkpoint)
        code = model.code if args.code is None else parse_code_spec(args.code)
        if code.code_hash != model.code.code_hash:
            raise ValueError("checkpoint was trained on a different code")
        decoder, name = model_decoder(model), args.decoder
        channel = args.channel or tcfg.channel
    else:
        if args.code is None:
            raise UsageError("--code is required for the mwpm and identity decoders")
        code = parse_code_spec(args.code)
        decoder, name = args.decoder, args.decoder
        channel = args.channel or "independent"
    ps = _probabilities(args.p)
    report = evaluate(decoder, code, channel, ps, args.samples, args.seed, T=args.T, q=args.q,
                      name=name, workers=args.workers)
    report.to_csv(args.out)
    write_manifest(args.out, argv, seed=args.seed, code_hash=code.code_hash,
                   extra={"seconds": [r.seconds for r in report.rows]})
    for r in report.rows:
        print(f"{name} {code.name} p={r.p:g} LER {r.ler:.6f} [{r.ler_lo:.6f}, {r.ler_hi:.6f}] "
              f"BER {r.ber:.6f}")
    return 0


def cmd_threshold(args, argv) -> int:
    from .evaluate import DecodeReport, estimate_threshold
    curves = {}
    for path in args.inputs:
        for (dec, L), (ps, lers) in DecodeReport.from_csv(path).curves().items():
            if args.decoder and dec != args.decoder:
                continue
            if L in curves:
                raise ValueError(f"more than one curve for L={L}; filter with --decoder")
            curves[L] = (ps, lers)
    result = estimate_threshold(curves)
    print(result)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"found": result.found, "threshold": result.threshold,
                       "spread": result.spread,
                       "crossings": [list(c) for c in result.crossings]}, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_plot(args, argv) -> int:
    from .plot import render_files
    if not args.inputs:
        raise UsageError("plot needs at least one --in CSV")
    render_files(args.inputs, args.out, thresholds=args.threshold or ())
    print(f"wrote {args.out}")
    return 0


def cmd_selftest(args, argv) -> int:
    from .selftest import run_selftest
    return 0 if run_selftest() else 1


def cmd_replay(args, argv) -> int:
    """Re-run a manifest's command into fresh paths and compare output digests."""
    from .manifest import file_digest, read_manifest
    data = read_manifest(args.manifest)
    old = list(data["argv"])
    new = list(old)
    remap = {}
    for flag in ("--out", "--out-dir"):
        if flag in new:
            i = new.index(flag) + 1
            target = new[i] + args.suffix
            if os.path.exists(target):
                raise RuntimeError(f"replay target {target} already exists")
            remap[new[i]] = target
            new[i] = target
    if not remap:
        raise ValueError("manifest command has no output path to redirect")
    code = main(new)
    if code != 0:
        return code
    ok = True
    for path, digest in sorted(data["outputs"].items()):
        replayed = path
        for src, dst in remap.items():
            if path == src or path.startswith(src.rstrip("/") + "/"):
                replayed = dst + path[len(src):]
        same = file_digest(replayed) == digest
        ok &= same
        print(f"{'MATCH' if same else 'MISMATCH'} {path} vs {replayed}")
    return 0 if ok else 1


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qecc-lab", description="Stabilizer-code decoding workbench.")
    p.add_argument("--version", action="version", version=f"qecc-lab {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("code", help="export or inspect codes")
    csub = c.add_subparsers(dest="code_cmd", parser_class=_Parser)
    csub.required = True
    ce = csub.add_parser("export", help="write H, logicals and mask to a file")
    ce.add_argument("--family", choices=("toric", "surface"), required=True)
    ce.add_argument("--L", type=int, required=True)
    ce.add_argument("--sector", choices=("xz", "x", "z"), default="xz")
    ce.add_argument("--out", required=True)
    ci = csub.add_parser("info", help="print code parameters")
    ci.add_argument("--code", required=True)
    c.set_defaults(func=cmd_code)

    s = sub.add_parser("sample", help="sample a QSYN dataset")
    s.add_argument("--code", required=True)
    s.add_argument("--channel", choices=("independent", "depolarizing"), required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--T", type=int, default=1)
    s.add_argument("--q", type=float, default=None)
    s.add_argument("--n-samples", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("decode", help="decode a dataset")
    dsub = d.add_subparsers(dest="decoder", parser_class=_Parser)
    dsub.required = True
    dm = dsub.add_parser("mwpm", help="minimum-weight perfect matching")
    dm.add_argument("--code", required=True)
    dm.add_argument("--dataset", required=True)
    dm.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decode)

    t = sub.add_parser("train", help="train a neural decoder")
    t.add_argument("--config", required=True)
    t.add_argument("--out-dir", default="run")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--resume-log", action="store_true", help="allow appending to an existing log")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="Monte-Carlo BER/LER evaluation")
    e.add_argument("--decoder", choices=("mwpm", "identity", "qecct", "mlp"), required=True)
    e.add_argument("--checkpoint")
    e.add_argument("--code")
    e.add_argument("--channel", choices=("independent", "depolarizing"))
    e.add_argument("--p", nargs="+", required=True)
    e.add_argument("--samples", type=int, default=100_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--T", type=int, default=1)
    e.add_argument("--q", type=float, default=None)
    e.add_argument("--workers", type=int, default=None)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    th = sub.add_parser("threshold", help="estimate the threshold from report CSVs")
    th.add_argument("--in", dest="inputs", nargs="+", required=True)
    th.add_argument("--decoder")
    th.add_argument("--out")
    th.set_defaults(func=cmd_threshold)

    pl = sub.add_parser("plot", help="render LER curves as SVG")
    pl.add_argument("--in", dest="inputs", nargs="*", default=[])
    pl.add_argument("--out", required=True)
    pl.add_argument("--threshold", type=float, action="append")
    pl.set_defaults(func=cmd_plot)

    st = sub.add_parser("selftest", help="run the invariant suites")
    st.set_defaults(func=cmd_selftest)

    rp = sub.add_parser("replay", help="re-run a command from its manifest and compare outputs")
    rp.add_argument("manifest")
    rp.add_argument("--suffix", default=".replay")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return int(args.func(args, argv))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (ValueError, RuntimeError, OSError, FloatingPointError) as exc:
        print(f"qecc-lab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

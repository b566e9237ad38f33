"""Run manifests: everything needed to replay a CLI invocation."""

from __future__ import annotations

import hashlib
import json
import platform
import sys

import numpy as np
import scipy

from . import __version__, _kernels


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def manifest_path(out_path: str) -> str:
    return out_path + ".manifest.json"


def write_manifest(out_path: str, argv: list[str], *, seed: int | None = None,
                   code_hash: str | None = None, config_text: str | None = None,
                   outputs: list[str] | None = None, extra: dict | None = None) -> str:
    outputs = outputs or [out_path]
    data = {
        "argv": list(argv),
        "seed": seed,
        "code_hash": code_hash,
        "config": config_text,
        "outputs": {p: file_digest(p) for p in outputs},
        "versions": {
            "qecc_lab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernel": _kernels.IMPLEMENTATION,
        },
        "platform": sys.platform,
    }
    if extra:
        data.update(extra)
    path = manifest_path(out_path)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if "argv" not in data or "outputs" not in data:
        raise ValueError(f"{path}: not a run manifest")
    return data

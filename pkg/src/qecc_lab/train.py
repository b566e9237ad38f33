"""Training loop for the transformer and MLP decoders."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from . import autodiff as ad
from .autodiff import NumericError, OptimState
from .codes import StabilizerCode, parse_code_spec
from .noise import CHANNELS, make_rng, sample_batch
from .qecct import MlpConfig, MlpModel, QecctConfig, QecctModel, total_loss

DEFAULT_P_RANGE = {"independent": (0.05, 0.15), "depolarizing": (0.10, 0.20)}
LOG_FIELDS = ("step", "epoch", "loss", "ber", "ler", "g", "grad_norm", "lr")


@dataclass
class TrainConfig:
    code: str = "toric:4:x"
    channel: str = "independent"
    p_min: float | None = None
    p_max: float | None = None
    T: int = 1
    q: float | None = None
    batch_size: int = 512
    steps_per_epoch: int = 5000
    epochs: int = 1
    seed: int = 0
    lr0: float = 5e-4
    lr_min: float = 5e-7
    model: str = "qecct"
    log_every: int = 50

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        lo, hi = DEFAULT_P_RANGE[self.channel]
        self.p_min = lo if self.p_min is None else self.p_min
        self.p_max = hi if self.p_max is None else self.p_max
        if not 0 < self.p_min <= self.p_max < 1:
            raise ValueError(f"p range must lie in (0, 1), got [{self.p_min}, {self.p_max}]")
        if self.batch_size < 1 or self.steps_per_epoch < 1 or self.epochs < 1:
            raise ValueError("batch_size, steps_per_epoch and epochs must be positive")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.model not in ("qecct", "mlp"):
            raise ValueError(f"unknown model kind {self.model!r}")

    @property
    def total_steps(self) -> int:
        return self.steps_per_epoch * self.epochs

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown training config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class TrainResult:
    model: QecctModel | MlpModel
    log: list[dict] = field(default_factory=list)
    checkpoint: str | None = None
    epoch_losses: list[float] = field(default_factory=list)


def build_model(code: StabilizerCode, kind: str, model_cfg, seed: int):
    if kind == "qecct":
        return QecctModel(code, model_cfg, seed=seed)
    return MlpModel(code, model_cfg, seed=seed)


def _model_cfg_from(kind: str, data: dict):
    if kind == "qecct":
        return QecctConfig.from_dict(data)
    known = {f.name for f in fields(MlpConfig)}
    if set(data) - known:
        raise ValueError(f"unknown MLP config keys: {sorted(set(data) - known)}")
    return MlpConfig(**data)


# checkpoints -------------------------------------------------------------


def save_model(path: str, model, train_cfg: TrainConfig, opt: OptimState | None = None) -> None:
    arrays = {f"param/{k}": v for k, v in model.state_dict().items()}
    if opt is not None:
        arrays.update({f"adam.m/{k}": v for k, v in opt.m.items()})
        arrays.update({f"adam.v/{k}": v for k, v in opt.v.items()})
        arrays["meta/step"] = np.array([opt.step], dtype=np.int64)
    tmp = path + ".tmp"
    ad.save_checkpoint(tmp, arrays)
    os.replace(tmp, path)
    meta = {"model": train_cfg.model, "model_config": asdict(model.cfg),
            "train_config": asdict(train_cfg), "code_hash": model.code.code_hash}
    with open(path + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str):
    """Rebuild a model (and its training config) from a checkpoint pair."""
    if not os.path.exists(path) or not os.path.exists(path + ".json"):
        raise FileNotFoundError(f"checkpoint {path} (or its .json config) not found")
    with open(path + ".json") as fh:
        meta = json.load(fh)
    train_cfg = TrainConfig.from_dict(meta["train_config"])
    code = parse_code_spec(train_cfg.code)
    if code.code_hash != meta["code_hash"]:
        raise ValueError(f"{path}: checkpoint was trained on a different code")
    model = build_model(code, meta["model"], _model_cfg_from(meta["model"], meta["model_config"]), 0)
    arrays = ad.load_checkpoint(path)
    model.load_state_dict({k[len("param/"):]: v for k, v in arrays.items() if k.startswith("param/")})
    return model, train_cfg


# loop ----------------------------------------------------------------------


def train(cfg: TrainConfig, model_cfg=None, out_dir: str | None = None,
          callback: Callable[[dict], None] | None = None) -> TrainResult:
    """Run ``cfg.total_steps`` Adam steps on freshly sampled batches.

    Every step draws ``p`` uniformly from ``[p_min, p_max]``.  With ``out_dir``
    set, metrics are appended to ``metrics.csv`` and ``model.qckpt`` is
    rewritten at each epoch end; a non-finite loss raises ``NumericError``
    and leaves the last checkpoint in place.
    """
    code = parse_code_spec(cfg.code)
    if model_cfg is None:
        model_cfg = QecctConfig() if cfg.model == "qecct" else MlpConfig()
    model = build_model(code, cfg.model, model_cfg, cfg.seed)
    opt = OptimState(lr0=cfg.lr0, lr_min=cfg.lr_min, t_max=cfg.total_steps)
    rng = make_rng(cfg.seed, 1)
    result = TrainResult(model)
    log_fh = writer = None
    ckpt = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        log_fh = open(os.path.join(out_dir, "metrics.csv"), "a", newline="")
        writer = csv.writer(log_fh, lineterminator="\n")
        if log_fh.tell() == 0:
            writer.writerow(LOG_FIELDS)
        ckpt = os.path.join(out_dir, "model.qckpt")
        result.checkpoint = ckpt
    try:
        for epoch in range(cfg.epochs):
            epoch_sum = 0.0
            for _ in range(cfg.steps_per_epoch):
                p = rng.uniform(cfg.p_min, cfg.p_max)
                batch = sample_batch(code, cfg.channel, p, rng, cfg.batch_size, T=cfg.T, q=cfg.q)
                truth = code.error_dense(batch.x, batch.z)
                out = model.forward(batch.syndromes)
                loss, terms = total_loss(model, out, truth)
                ad.zero_grad(model.params)
                loss.backward()
                gnorm = ad.grad_norm(model.params)
                if not np.isfinite(gnorm):
                    raise NumericError(f"gradient norm is not finite at step {opt.step}")
                lr = ad.adam_step(model.params, opt)
                value = float(loss.data)
                epoch_sum += value
                if opt.step % cfg.log_every == 0 or opt.step == cfg.total_steps:
                    row = {"step": opt.step, "epoch": epoch, "loss": value,
                           "ber": terms["ber"], "ler": terms["ler"], "g": terms.get("g", 0.0),
                           "grad_norm": gnorm, "lr": lr}
                    result.log.append(row)
                    if writer:
                        writer.writerow([repr(row[k]) if isinstance(row[k], float) else row[k]
                                         for k in LOG_FIELDS])
                        log_fh.flush()
                    if callback:
                        callback(row)
            result.epoch_losses.append(epoch_sum / cfg.steps_per_epoch)
            if ckpt:
                save_model(ckpt, model, cfg, opt)
    finally:
        if log_fh:
            log_fh.close()
    return result


def model_decoder(model) -> Callable[[np.ndarray], np.ndarray]:
    return lambda s: model.predict(s)

"""INI-style run configuration with typed, documented defaults.

Sections and keys (defaults in brackets)::

    [code]        spec [toric:4:x]
    [channel]     type [independent]  p_min, p_max [per-channel range]  T [1]  q [p when T > 1]
    [model]       kind [qecct]  N [6]  d [128]  heads [8]  bin_mode [sigmoid]
                  pooling_layer [N // 2, at least 1]  lambda_ber [0.5]  lambda_ler [1.0]
                  lambda_g [0.5]  use_g_omega [true]  use_mask [true]  dtype [float32]
                  depth [10]  width [256]   (MLP only)
    [training]    batch_size [512]  steps_per_epoch [5000]  epochs [1]  seed [0]
                  lr0 [5e-4]  lr_min [5e-7]  log_every [50]
    [evaluation]  p [empty list]  samples [100000]  seed [0]

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .qecct import MlpConfig, QecctConfig
from .train import TrainConfig


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _opt_float(v: str):
    return None if v.strip().lower() in ("", "none") else float(v)


def _opt_int(v: str):
    return None if v.strip().lower() in ("", "none") else int(v)


def _floats(v: str) -> list[float]:
    return [float(x) for x in v.replace(",", " ").split()]


SCHEMA: dict[str, dict[str, callable]] = {
    "code": {"spec": str},
    "channel": {"type": str, "p_min": _opt_float, "p_max": _opt_float, "T": int, "q": _opt_float},
    "model": {"kind": str, "N": int, "d": int, "heads": int, "bin_mode": str,
              "pooling_layer": _opt_int, "lambda_ber": float, "lambda_ler": float,
              "lambda_g": float, "use_g_omega": _bool, "use_mask": _bool, "dtype": str,
              "depth": int, "width": int},
    "training": {"batch_size": int, "steps_per_epoch": int, "epochs": int, "seed": int,
                 "lr0": float, "lr_min": float, "log_every": int},
    "evaluation": {"p": _floats, "samples": int, "seed": int},
}

_MLP_KEYS = {"depth", "width"}
_QECCT_KEYS = {"N", "d", "heads", "pooling_layer", "use_mask"}


@dataclass
class RunConfig:
    text: str
    values: dict[str, dict]

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keep key case (N, T)
        parser.read_string(text)
        values: dict[str, dict] = {s: {} for s in SCHEMA}
        for section in parser.sections():
            if section not in SCHEMA:
                raise ValueError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ValueError(f"unknown key {key!r} in [{section}]")
                try:
                    values[section][key] = SCHEMA[section][key](raw)
                except ValueError as exc:
                    raise ValueError(f"[{section}] {key}: {exc}") from None
        return cls(text, values)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.parse(fh.read())

    def train_config(self) -> TrainConfig:
        ch = dict(self.values["channel"])
        tr = self.values["training"]
        return TrainConfig(
            code=self.values["code"].get("spec", "toric:4:x"),
            channel=ch.pop("type", "independent"),
            model=self.values["model"].get("kind", "qecct"),
            **ch, **tr,
        )

    def model_config(self):
        m = {k: v for k, v in self.values["model"].items() if k != "kind"}
        kind = self.values["model"].get("kind", "qecct")
        if kind == "mlp":
            bad = set(m) & _QECCT_KEYS
            if bad:
                raise ValueError(f"keys {sorted(bad)} do not apply to the MLP model")
            return MlpConfig(**m)
        bad = set(m) & _MLP_KEYS
        if bad:
            raise ValueError(f"keys {sorted(bad)} do not apply to the transformer model")
        return QecctConfig(**m)

    @property
    def evaluation(self) -> dict:
        return {"p": [], "samples": 100_000, "seed": 0, **self.values["evaluation"]}

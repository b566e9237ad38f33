"""Masked transformer decoder with a syndrome-conditioned noise prior.

Input per measurement round ``t``: ``h_t = [g(s_t), 1 - 2 s_t]`` where ``g`` is a
small MLP mapping the syndrome to per-coordinate noise logits.  Each position
of ``h_t`` scales its own learnable ``d``-vector.  The first layers run on every
round separately; their hidden states are then averaged over rounds and the
remaining layers run once.  The head reduces each position to a scalar and
maps the ``n_err + n_s`` scalars to ``n_err`` noise logits.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .codes import StabilizerCode, build_mask

BIN_MODES = ("sigmoid", "ste")


@dataclass
class QecctConfig:
    N: int = 6
    d: int = 128
    heads: int = 8
    bin_mode: str = "sigmoid"
    pooling_layer: int | None = None  # default max(1, N // 2)
    lambda_ber: float = 0.5
    lambda_ler: float = 1.0
    lambda_g: float = 0.5
    use_g_omega: bool = True
    use_mask: bool = True
    dtype: str = "float32"

    def __post_init__(self):
        if self.pooling_layer is None:
            self.pooling_layer = max(1, self.N // 2)
        self.validate()

    def validate(self) -> None:
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not 1 <= self.pooling_layer <= self.N:
            raise ValueError(f"pooling_layer must lie in [1, {self.N}], got {self.pooling_layer}")
        if self.d % self.heads:
            raise ValueError(f"d={self.d} is not divisible by heads={self.heads}")
        if min(self.lambda_ber, self.lambda_ler, self.lambda_g) < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.bin_mode not in BIN_MODES:
            raise ValueError(f"bin_mode must be one of {BIN_MODES}")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "QecctConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class ModelOutput:
    noise_logits: Tensor               # (B, n_err)
    g_estimates: Tensor | None         # (B, T, n_err) logits, None without g
    pooled: Tensor = field(repr=False, default=None)


def xor_projection(logicals: np.ndarray, x: Tensor, bin_mode: str = "sigmoid") -> Tensor:
    """Soft GF(2) product ``logicals @ x`` via the bipolar map ``u -> 1 - 2u``.

    ``x`` holds probabilities in [0, 1] along its last axis.  Row ``i`` gives
    ``1/2 - 1/2 * prod_{j: L_ij = 1} (1 - 2 x_j)``; with ``bin_mode="ste"`` the
    inputs are hard-thresholded first with a pass-through gradient.
    """
    Lm = np.asarray(logicals, dtype=x.dtype)
    if Lm.ndim != 2 or Lm.shape[1] != x.shape[-1]:
        raise ValueError(f"logical matrix {Lm.shape} does not match input {x.shape}")
    if bin_mode == "ste":
        x = ad.ste_round(x)
    elif bin_mode != "sigmoid":
        raise ValueError(f"unknown bin_mode {bin_mode!r}")
    phi = 1.0 - 2.0 * x
    phi = ad.reshape(phi, x.shape[:-1] + (1, x.shape[-1]))
    factors = phi * Lm + (1.0 - Lm)
    return 0.5 - 0.5 * ad.prod(factors, axis=-1)


def pool_mean(x: Tensor, axis: int) -> Tensor:
    """Mean over ``axis`` accumulated in float64 and cast back.

    A single-element axis is squeezed without any arithmetic, so pooling one
    round is exactly the identity.
    """
    if x.shape[axis] == 1:
        return ad.reshape(x, x.shape[:axis] + x.shape[axis + 1:])
    n = x.shape[axis]
    y = np.sort(x.data.astype(np.float64), axis=axis).sum(axis=axis) / n
    shape = x.shape

    def back(g):
        return (np.broadcast_to(np.expand_dims(g / n, axis), shape).astype(x.dtype),)

    return ad.tensor._node(y.astype(x.dtype), (x,), back)


class _Params:
    """Ordered parameter registry with deterministic initialisation."""

    def __init__(self, rng: np.random.Generator, dtype):
        self.rng = rng
        self.dtype = dtype
        self.items: dict[str, Tensor] = {}

    def add(self, name: str, value: np.ndarray) -> Tensor:
        t = Tensor(np.asarray(value, dtype=self.dtype), requires_grad=True, name=name)
        self.items[name] = t
        return t

    def dense(self, name: str, fan_in: int, fan_out: int, scale: float = 1.0):
        w = self.rng.standard_normal((fan_in, fan_out)) * (scale / np.sqrt(fan_in))
        return self.add(f"{name}.w", w), self.add(f"{name}.b", np.zeros(fan_out))

    def norm(self, name: str, dim: int):
        return self.add(f"{name}.gamma", np.ones(dim)), self.add(f"{name}.beta", np.zeros(dim))


class GOmega:
    """Two affine maps ``n_s -> 5 n_s -> n_err`` with GELU in between."""

    def __init__(self, params: _Params, n_s: int, n_err: int, prefix: str = "g"):
        self.n_s, self.n_err = n_s, n_err
        self.w1, self.b1 = params.dense(f"{prefix}.fc1", n_s, 5 * n_s)
        self.w2, self.b2 = params.dense(f"{prefix}.fc2", 5 * n_s, n_err)

    def __call__(self, s: Tensor) -> Tensor:
        if s.shape[-1] != self.n_s:
            raise ValueError(f"syndrome length {s.shape[-1]} does not match n_s={self.n_s}")
        hidden = ad.gelu(ad.linear(s, self.w1, self.b1))
        return ad.linear(hidden, self.w2, self.b2)


class _Model:
    """Shared pieces of the transformer and MLP decoders."""

    code: StabilizerCode
    params: dict[str, Tensor]
    np_dtype: type
    use_g_omega: bool
    g: GOmega | None

    def _syndrome_input(self, syndromes) -> np.ndarray:
        s = np.asarray(syndromes)
        if s.ndim == 2:
            s = s[:, None, :]
        if s.ndim != 3 or s.shape[-1] != self.code.n_s:
            raise ValueError(f"expected syndromes of shape (B, T, {self.code.n_s}), got {s.shape}")
        return s.astype(self.np_dtype)

    def _embed_input(self, s: np.ndarray) -> tuple[Tensor, Tensor | None]:
        """``h = [g(s), 1 - 2s]`` for every round, flattened to ``(B*T, S)``."""
        B, T, n_s = s.shape
        flat = Tensor(s.reshape(B * T, n_s))
        bipolar = Tensor(1.0 - 2.0 * s.reshape(B * T, n_s))
        if self.use_g_omega:
            g_logits = self.g(flat)
            h = ad.concat([g_logits, bipolar], axis=-1)
            g_est = ad.reshape(g_logits, (B, T, self.code.n_err))
        else:
            ones = Tensor(np.ones((B * T, self.code.n_err), dtype=self.np_dtype))
            h = ad.concat([ones, bipolar], axis=-1)
            g_est = None
        return h, g_est

    # parameter I/O -----------------------------------------------------

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        missing = set(self.params) - set(state)
        extra = set(state) - set(self.params)
        if missing or extra:
            raise ValueError(f"checkpoint mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        for k, v in state.items():
            if v.shape != self.params[k].shape:
                raise ValueError(f"shape mismatch for {k}: {v.shape} vs {self.params[k].shape}")
            self.params[k].data = np.array(v, dtype=self.np_dtype)

    def n_parameters(self) -> int:
        return int(sum(p.data.size for p in self.params.values()))

    def predict(self, syndromes, batch_size: int = 1024) -> np.ndarray:
        """Hard noise estimate ``(B, n_err)``: logits above 0."""
        s = np.asarray(syndromes)
        outs = []
        for start in range(0, s.shape[0], batch_size):
            logits = self.forward(s[start:start + batch_size]).noise_logits.data
            outs.append((logits > 0).astype(np.uint8))
        return np.concatenate(outs) if outs else np.zeros((0, self.code.n_err), np.uint8)


class QecctModel(_Model):
    def __init__(self, code: StabilizerCode, cfg: QecctConfig, seed: int = 0):
        cfg.validate()
        self.code = code
        self.cfg = cfg
        self.np_dtype = np.dtype(cfg.dtype).type
        self.use_g_omega = cfg.use_g_omega
        n_err, n_s = code.n_err, code.n_s
        self.seq = n_err + n_s
        P = _Params(np.random.default_rng(seed), self.np_dtype)
        self.g = GOmega(P, n_s, n_err) if cfg.use_g_omega else None
        self.embedding = P.add("embed", P.rng.standard_normal((self.seq, cfg.d)))
        self.layers = []
        for i in range(cfg.N):
            p = f"layer{i}"
            layer = {
                "ln1": P.norm(f"{p}.ln1", cfg.d),
                "q": P.dense(f"{p}.q", cfg.d, cfg.d),
                "k": P.dense(f"{p}.k", cfg.d, cfg.d),
                "v": P.dense(f"{p}.v", cfg.d, cfg.d),
                "o": P.dense(f"{p}.o", cfg.d, cfg.d),
                "ln2": P.norm(f"{p}.ln2", cfg.d),
                "ff1": P.dense(f"{p}.ff1", cfg.d, 4 * cfg.d),
                "ff2": P.dense(f"{p}.ff2", 4 * cfg.d, cfg.d),
            }
            self.layers.append(layer)
        self.final_ln = P.norm("final_ln", cfg.d)
        self.head1 = P.dense("head1", cfg.d, 1)
        self.head2 = P.dense("head2", self.seq, n_err)
        self.params = P.items
        if cfg.use_mask:
            allowed = build_mask(code).dense
        else:
            allowed = np.ones((self.seq, self.seq), dtype=bool)
        self.mask_allowed = allowed
        self.mask = ad.additive_mask(allowed, self.np_dtype)

    def attention(self, x: Tensor, layer: dict) -> Tensor:
        B, S, d = x.shape
        h = self.cfg.heads
        dh = d // h

        def heads(t: Tensor) -> Tensor:
            return ad.transpose(ad.reshape(t, (B, S, h, dh)), (0, 2, 1, 3))

        q = heads(ad.linear(x, *layer["q"]))
        k = heads(ad.linear(x, *layer["k"]))
        v = heads(ad.linear(x, *layer["v"]))
        scores = ad.matmul(q, ad.swapaxes(k, -1, -2)) * (1.0 / math.sqrt(dh))
        attn = ad.softmax(scores, self.mask)
        ctx = ad.transpose(ad.matmul(attn, v), (0, 2, 1, 3))
        return ad.linear(ad.reshape(ctx, (B, S, d)), *layer["o"])

    def block(self, x: Tensor, layer: dict) -> Tensor:
        x = x + self.attention(ad.layer_norm(x, *layer["ln1"]), layer)
        hidden = ad.gelu(ad.linear(ad.layer_norm(x, *layer["ln2"]), *layer["ff1"]))
        return x + ad.linear(hidden, *layer["ff2"])

    def forward(self, syndromes) -> ModelOutput:
        s = self._syndrome_input(syndromes)
        B, T, _ = s.shape
        h, g_est = self._embed_input(s)
        x = ad.reshape(h, (B * T, self.seq, 1)) * self.embedding
        for layer in self.layers[:self.cfg.pooling_layer]:
            x = self.block(x, layer)
        x = pool_mean(ad.reshape(x, (B, T, self.seq, self.cfg.d)), axis=1)
        pooled = x
        for layer in self.layers[self.cfg.pooling_layer:]:
            x = self.block(x, layer)
        x = ad.layer_norm(x, *self.final_ln)
        scalars = ad.reshape(ad.linear(x, *self.head1), (B, self.seq))
        logits = ad.linear(scalars, *self.head2)
        return ModelOutput(logits, g_est, pooled)


@dataclass
class MlpConfig:
    depth: int = 10
    width: int = 256
    bin_mode: str = "sigmoid"
    lambda_ber: float = 0.5
    lambda_ler: float = 1.0
    lambda_g: float = 0.5
    use_g_omega: bool = True
    dtype: str = "float32"

    def validate(self) -> None:
        if self.depth < 1 or self.width < 1:
            raise ValueError("depth and width must be positive")
        if self.bin_mode not in BIN_MODES:
            raise ValueError(f"bin_mode must be one of {BIN_MODES}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class MlpModel(_Model):
    """Fully connected baseline on the same input and losses.

    ``depth`` affine maps with GELU between them; repeated rounds are
    averaged after ``depth // 2`` of them (on the raw input when that is 0).
    """

    def __init__(self, code: StabilizerCode, cfg: MlpConfig, seed: int = 0):
        cfg.validate()
        self.code = code
        self.cfg = cfg
        self.np_dtype = np.dtype(cfg.dtype).type
        self.use_g_omega = cfg.use_g_omega
        self.seq = code.n_err + code.n_s
        P = _Params(np.random.default_rng(seed), self.np_dtype)
        self.g = GOmega(P, code.n_s, code.n_err) if cfg.use_g_omega else None
        dims = [self.seq] + [cfg.width] * (cfg.depth - 1) + [code.n_err]
        self.fcs = [P.dense(f"fc{i}", dims[i], dims[i + 1]) for i in range(cfg.depth)]
        self.pool_at = cfg.depth // 2
        self.params = P.items

    def forward(self, syndromes) -> ModelOutput:
        s = self._syndrome_input(syndromes)
        B, T, _ = s.shape
        x, g_est = self._embed_input(s)
        for i, (w, b) in enumerate(self.fcs):
            if i == self.pool_at:
                x = pool_mean(ad.reshape(x, (B, T) + x.shape[1:]), axis=1)
            x = ad.linear(x, w, b)
            if i < len(self.fcs) - 1:
                x = ad.gelu(x)
        return ModelOutput(x, g_est, None)


def loss_terms(model: _Model, out: ModelOutput, errors: np.ndarray) -> dict[str, Tensor]:
    """Unweighted BER, LER and prior terms for true errors ``(B, n_err)``."""
    eps = np.asarray(errors, dtype=out.noise_logits.dtype)
    if eps.shape != out.noise_logits.shape:
        raise ValueError(f"errors {eps.shape} do not match logits {out.noise_logits.shape}")
    Lm = model.code.logicals_dense
    target_log = (eps.astype(np.int64) @ Lm.T.astype(np.int64)) % 2
    terms = {"ber": ad.bce_with_logits(out.noise_logits, eps)}
    soft = ad.sigmoid(out.noise_logits)
    terms["ler"] = ad.bce(xor_projection(Lm, soft, model.cfg.bin_mode), target_log)
    if out.g_estimates is not None:
        terms["g"] = ad.bce_with_logits(ad.mean(out.g_estimates, axis=1), eps)
    return terms


def total_loss(model: _Model, out: ModelOutput, errors: np.ndarray) -> tuple[Tensor, dict[str, float]]:
    """Weighted objective and the float value of each term."""
    cfg = model.cfg
    terms = loss_terms(model, out, errors)
    weights = {"ber": cfg.lambda_ber, "ler": cfg.lambda_ler, "g": cfg.lambda_g}
    loss = None
    for name, t in terms.items():
        if weights[name] == 0:
            continue
        part = t * weights[name]
        loss = part if loss is None else loss + part
    if loss is None:
        loss = terms["ber"] * 0.0
    ad.check_finite(loss, "loss")
    return loss, {k: float(v.data) for k, v in terms.items()}

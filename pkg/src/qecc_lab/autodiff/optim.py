"""Adam with a cosine learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import NumericError, Tensor


def cosine_lr(t: int, t_max: int, lr0: float, lr_min: float) -> float:
    """``lr_min + (lr0 - lr_min) * (1 + cos(pi * t / t_max)) / 2``, held at ``lr_min`` past ``t_max``."""
    if t_max <= 0:
        return lr0
    t = min(max(t, 0), t_max)
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + math.cos(math.pi * t / t_max))


@dataclass
class OptimState:
    lr0: float = 5e-4
    lr_min: float = 5e-7
    t_max: int = 1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def lr(self) -> float:
        return cosine_lr(self.step, self.t_max, self.lr0, self.lr_min)


def adam_step(params: dict[str, Tensor], st: OptimState) -> float:
    """Apply one in-place Adam update using each parameter's ``.grad``.

    Parameters without a gradient are left untouched.  Returns the learning
    rate used for this step.
    """
    lr = st.lr
    st.step += 1
    b1, b2 = st.beta1, st.beta2
    c1 = 1.0 - b1 ** st.step
    c2 = 1.0 - b2 ** st.step
    for name, p in params.items():
        g = p.grad
        if g is None:
            continue
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {name} {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"gradient of {name} is not finite")
        m = st.m.get(name)
        if m is None:
            m = st.m[name] = np.zeros_like(p.data)
            st.v[name] = np.zeros_like(p.data)
        v = st.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        mhat = m / c1
        vhat = v / c2
        p.data -= (lr * mhat / (np.sqrt(vhat) + st.eps)).astype(p.dtype, copy=False)
    return lr


def grad_norm(params: dict[str, Tensor]) -> float:
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(p.grad.astype(np.float64) ** 2))
    return math.sqrt(total)


def zero_grad(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None

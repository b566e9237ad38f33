"""Small reverse-mode autodiff engine, Adam optimizer and checkpoint format."""

from .checkpoint import load_checkpoint, save_checkpoint
from .optim import OptimState, adam_step, cosine_lr, grad_norm, zero_grad
from .tensor import (MASK_VALUE, NumericError, Tensor, add, additive_mask, backward, bce,
                     bce_with_logits, check_finite, concat, exp, gelu, getitem, layer_norm,
                     linear, log, matmul, mean, mul, neg, prod, reshape, sigmoid, softmax,
                     stack, ste_round, swapaxes, transpose, tsum)

__all__ = [
    "MASK_VALUE", "NumericError", "OptimState", "Tensor", "adam_step", "add", "additive_mask",
    "backward", "bce", "bce_with_logits", "check_finite", "concat", "cosine_lr", "exp", "gelu",
    "getitem", "grad_norm", "layer_norm", "linear", "load_checkpoint", "log", "matmul", "mean",
    "mul", "neg", "prod", "reshape", "save_checkpoint", "sigmoid", "softmax", "stack",
    "ste_round", "swapaxes", "transpose", "tsum", "zero_grad",
]

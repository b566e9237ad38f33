"""Matching kernels: compiled extension when available, pure Python otherwise.

Set ``QECC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pure

if os.environ.get("QECC_PURE_PYTHON") == "1":
    _impl = _pure
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = _pure

IMPLEMENTATION = _impl.IMPLEMENTATION
max_weight_matching = _impl.max_weight_matching
min_weight_perfect_matching = _impl.min_weight_perfect_matching
decode_batch = _impl.decode_batch
decode_spacetime_batch = _impl.decode_spacetime_batch


def get_backend(name: str | None = None):
    """Kernel module by name (``"cython"`` / ``"python"``), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pure
    if name == "cython":
        from . import _fast
        return _fast
    raise ValueError(f"unknown kernel backend {name!r}")

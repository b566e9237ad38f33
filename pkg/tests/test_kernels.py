import os
import subprocess
import sys

import pytest

from qecc_lab import _kernels


def _implementation(env_extra):
    env = dict(os.environ, **env_extra)
    proc = subprocess.run([sys.executable, "-c", "from qecc_lab import _kernels; print(_kernels.IMPLEMENTATION)"],
                          capture_output=True, text=True, env=env, check=True)
    return proc.stdout.strip()


def test_forced_fallback():
    assert _implementation({"QECC_PURE_PYTHON": "1"}) == "python"


def test_default_prefers_extension():
    try:
        _kernels.get_backend("cython")
    except ImportError:
        pytest.skip("compiled kernel not built")
    assert _implementation({"QECC_PURE_PYTHON": "0"}) == "cython"


def test_get_backend():
    assert _kernels.get_backend(None).IMPLEMENTATION == _kernels.IMPLEMENTATION
    assert _kernels.get_backend("python").IMPLEMENTATION == "python"
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")

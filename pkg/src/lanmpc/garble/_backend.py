"""Pick the garbling kernels at import time.

The compiled AES-NI core is used when it was built and the CPU supports it;
``LANMPC_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from lanmpc.garble import _pykernels

kernels = _pykernels

if not os.environ.get("LANMPC_PURE_PYTHON"):
    try:
        from lanmpc.garble import _core
    except ImportError:
        pass
    else:
        if _core.cpu_supported():
            kernels = _core

BACKEND: str = kernels.NAME


def available() -> dict:
    """All importable kernel modules by name, for cross-checks and benchmarks."""
    found = {_pykernels.NAME: _pykernels}
    try:
        from lanmpc.garble import _core
    except ImportError:
        return found
    if _core.cpu_supported():
        found[_core.NAME] = _core
    return found

"""Two-party semi-honest MPC: garbled circuits and additive secret sharing over
instrumented channels, with a cost model and benchmark harness."""
from lanmpc.garble._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]

"""Backend selection for the monomial-term kernels.

The compiled extension is used when it imports and the variable table packs
into 63 bits; otherwise the pure-Python module takes over. Setting
``PSEUDOMECH_PURE_PYTHON=1`` forces the fallback everywhere.
"""
import os

from pseudomech import _pykernels as python_backend

try:
    if os.environ.get("PSEUDOMECH_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from pseudomech import _kernels as compiled_backend
except ImportError:
    compiled_backend = None

BACKEND = "cython" if compiled_backend is not None else "python"

MAX_COMPILED_BITS = 63


def backend_for(total_bits):
    if compiled_backend is not None and total_bits <= MAX_COMPILED_BITS:
        return compiled_backend
    return python_backend

"""Backend selection for the Monte Carlo kernel.

The compiled extension is used when it was built; otherwise the NumPy version.
``RCDARMA_BACKEND=python`` forces the fallback, ``=cython`` makes a missing
extension an import error.
"""

import os

from . import _kernel_py

_choice = os.environ.get("RCDARMA_BACKEND", "auto").lower()

try:
    if _choice == "python":
        raise ImportError("python backend requested")
    from ._kernel import simulate_chunk
    BACKEND = "cython"
except ImportError:
    if _choice == "cython":
        raise
    simulate_chunk = _kernel_py.simulate_chunk
    BACKEND = "python"

BACKENDS = {"python": _kernel_py.simulate_chunk}
if BACKEND == "cython":
    BACKENDS["cython"] = simulate_chunk

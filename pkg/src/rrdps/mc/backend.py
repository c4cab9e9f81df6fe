"""Pick the sampling kernel: compiled when available, numpy otherwise.

Set ``RRDPS_PURE_PYTHON=1`` to force the numpy backend.
"""

from __future__ import annotations

import os

from . import _pykernel

BACKEND = "python"
simulate_block = _pykernel.simulate_block

if os.environ.get("RRDPS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernel
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        simulate_block = _ckernel.simulate_block


def get_kernel(name: str | None = None):
    """Return ``(name, simulate_block)`` for ``"cython"``, ``"python"`` or the default."""
    if name is None:
        return BACKEND, simulate_block
    if name == "python":
        return "python", _pykernel.simulate_block
    if name == "cython":
        from . import _ckernel

        return "cython", _ckernel.simulate_block
    raise ValueError(f"unknown backend {name!r}")

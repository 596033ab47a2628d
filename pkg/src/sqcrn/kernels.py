"""SSA kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
module with identical arithmetic is used. Set ``SQCRN_PURE_PYTHON=1`` to force
the fallback.
"""

import os

from . import _pykernels

HORIZON = _pykernels.HORIZON
ABSORBED = _pykernels.ABSORBED
NEED_MORE = _pykernels.NEED_MORE

_backend = _pykernels
BACKEND = "python"
if not os.environ.get("SQCRN_PURE_PYTHON"):
    try:
        from . import _ckernels as _backend  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _backend = _pykernels

propensities = _backend.propensities
ssa_advance = _backend.ssa_advance
ssa_final = _backend.ssa_final


def backend_module(name: str):
    """Return the kernel module for ``"python"`` or ``"cython"`` (ImportError if not built)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(name)

"""Kernel backend selection.

The compiled extension is used when importable; the pure-Python kernels are
the fallback and the bit-exact reference.  Set ``STABLE_EXIT_BACKEND`` to
``pure`` or ``compiled`` to force a choice (read once at import time).
"""

import os

from . import _pykernels

try:
    from . import _ckernels

    HAVE_COMPILED = True
except ImportError:  # built without the extension
    _ckernels = None
    HAVE_COMPILED = False


def get_backend(name=None):
    """Return the kernel module for ``name`` in {"auto", "pure", "compiled"}."""
    name = name or "auto"
    if name == "auto":
        return _ckernels if HAVE_COMPILED else _pykernels
    if name == "pure":
        return _pykernels
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError(
                "compiled kernels unavailable; build the extension or set "
                "STABLE_EXIT_BACKEND=pure"
            )
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


kernels = get_backend(os.environ.get("STABLE_EXIT_BACKEND"))


def backend_name() -> str:
    return "compiled" if kernels is _ckernels else "pure"

"""Kernel backend selection.

The fixed-point and simulation inner loops exist twice: a compiled Cython
extension (``_core``) and a pure-Python twin (``pure``) with identical
semantics.  The compiled backend is used when available; set the
``DECREACH_PURE`` environment variable (or call :func:`select`) to force the
pure one.  ``python -m decreach.bench`` compares the two.
"""

import os

from . import pure

try:
    from . import _core  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:
    _core = None
    HAVE_COMPILED = False

if os.environ.get("DECREACH_PURE") or not HAVE_COMPILED:
    impl = pure
else:
    impl = _core


def select(name: str):
    """Switch the active backend: 'pure', 'compiled' or 'auto'."""
    global impl
    if name == "pure":
        impl = pure
    elif name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels are not available")
        impl = _core
    elif name == "auto":
        impl = _core if HAVE_COMPILED else pure
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    return impl


def backend_name() -> str:
    return "compiled" if impl is _core and _core is not None else "pure"

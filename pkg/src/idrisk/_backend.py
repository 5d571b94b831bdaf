"""Selects the centrality kernel implementation at import time.

Prefers the compiled Cython module; falls back to the pure-Python twin when
the extension is missing or IDRISK_PURE_PYTHON=1 is set.
"""

from __future__ import annotations

import os

from . import _centrality_py

if os.environ.get("IDRISK_PURE_PYTHON") == "1":
    kernels = _centrality_py
else:
    try:
        from . import _centrality as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _centrality_py

HAVE_COMPILED = bool(getattr(kernels, "COMPILED", False))
BACKEND_NAME = "compiled" if HAVE_COMPILED else "python"


def get_kernels(backend: str | None = None):
    """Resolve a kernel module by name ('compiled', 'python' or None=default)."""
    if backend is None:
        return kernels
    if backend == "python":
        return _centrality_py
    if backend == "compiled":
        from . import _centrality  # raises ImportError when not built

        return _centrality
    raise ValueError(f"unknown backend {backend!r}")

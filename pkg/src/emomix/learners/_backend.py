"""Solver backend selection.

Prefers the compiled Cython kernels and falls back to the pure-numpy twin
when the extension is missing.  Set ``EMOMIX_PURE_PYTHON=1`` to force the
fallback (used by the backend-equivalence tests and the benchmark).
"""

import os

if os.environ.get("EMOMIX_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

backend_name: str = kernels.BACKEND

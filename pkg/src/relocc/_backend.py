"""Kernel backend selection: compiled extension when available, numpy fallback
otherwise.  Set RELOCC_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by tests that compare the two implementations)."""

from __future__ import annotations

import os

if os.environ.get("RELOCC_PURE_PYTHON"):
    from . import _kernels_py as _impl

    _BACKEND = "pure-python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        _BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        _BACKEND = "pure-python"

product_output_entropies = _impl.product_output_entropies


def backend_name() -> str:
    """Which kernel implementation this process is using."""
    return _BACKEND

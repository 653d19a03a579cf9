"""Kernel selection.

The compiled extension is used when it imports; ``PILMS_PURE_PYTHON=1``
forces the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("PILMS_PURE_PYTHON", "") not in ("", "0"):
    _kernels = None
else:
    try:
        from . import _kernels
    except ImportError:
        _kernels = None

import numpy as np

_impl = _kernels if _kernels is not None else _kernels_py
BACKEND = "compiled" if _kernels is not None else "python"


def esym_rows(signs):
    """Rows of e_0..e_n for each +-1 outcome string (shape ``(rows, n)``)."""
    return _impl.esym_rows(np.ascontiguousarray(signs, dtype=np.int8))


def bin_pauli_types(coef, n, pos):
    return _impl.bin_pauli_types(
        np.ascontiguousarray(coef, dtype=np.float64), n,
        np.ascontiguousarray(pos, dtype=np.int64),
    )


def spread_pauli_types(values, n, pos):
    return _impl.spread_pauli_types(
        np.ascontiguousarray(values, dtype=np.float64), n,
        np.ascontiguousarray(pos, dtype=np.int64),
    )

__all__ = ["BACKEND", "esym_rows", "bin_pauli_types", "spread_pauli_types"]

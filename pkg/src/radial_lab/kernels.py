"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set RADIAL_LAB_PURE_PYTHON=1 to force the fallback (used by the benchmark and
by tests that exercise both paths).
"""

import os

import numpy as np

if os.environ.get("RADIAL_LAB_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl

    HAVE_COMPILED = False
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        from . import _kernels_py as _impl

        HAVE_COMPILED = False


def _as_c_double(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def thomas(sub, diag, sup, rhs):
    """Solve a tridiagonal system; sub/sup have length n-1, diag/rhs length n."""
    return _impl.thomas(
        _as_c_double(sub), _as_c_double(diag), _as_c_double(sup), _as_c_double(rhs)
    )


def pav_nondecreasing(y, w):
    """Weighted L2 projection of y onto nondecreasing sequences."""
    return _impl.pav_nondecreasing(_as_c_double(y), _as_c_double(w))


def sturm_count(diag, off, x):
    """Count eigenvalues below x for a symmetric tridiagonal matrix."""
    return _impl.sturm_count(_as_c_double(diag), _as_c_double(off), float(x))

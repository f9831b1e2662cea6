"""Fallback implementations of the hot kernels (numpy/scipy, no compilation).

Same signatures as the compiled module `_kernels_cy`; `kernels` picks one of
the two at import time.
"""

import numpy as np
from scipy.linalg import solve_banded


def thomas(sub, diag, sup, rhs):
    """Solve the tridiagonal system with sub/main/super diagonals.

    `sub` and `sup` have length n-1, `diag` and `rhs` length n.
    """
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    return solve_banded((1, 1), ab, rhs)


def pav_nondecreasing(y, w):
    """Weighted least-squares projection onto nondecreasing sequences.

    Pool-adjacent-violators; weights must be nonnegative with positive sum.
    """
    n = y.shape[0]
    # block j covers indices [start[j], start[j+1]); value/weight per block
    val = np.empty(n)
    wt = np.empty(n)
    start = np.empty(n + 1, dtype=np.intp)
    m = 0
    for i in range(n):
        val[m] = y[i]
        wt[m] = w[i]
        start[m] = i
        m += 1
        while m > 1 and val[m - 2] > val[m - 1]:
            tot = wt[m - 2] + wt[m - 1]
            if tot > 0.0:
                val[m - 2] = (wt[m - 2] * val[m - 2] + wt[m - 1] * val[m - 1]) / tot
            else:
                val[m - 2] = 0.5 * (val[m - 2] + val[m - 1])
            wt[m - 2] = tot
            m -= 1
    start[m] = n
    out = np.empty(n)
    for j in range(m):
        out[start[j] : start[j + 1]] = val[j]
    return out


def sturm_count(diag, off, x):
    """Number of eigenvalues of the symmetric tridiagonal matrix below x."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if q < 0.0:
        count += 1
    tiny = 1e-300
    for i in range(1, n):
        if q == 0.0:
            q = tiny
        q = diag[i] - x - off[i - 1] * off[i - 1] / q
        if q < 0.0:
            count += 1
    return count

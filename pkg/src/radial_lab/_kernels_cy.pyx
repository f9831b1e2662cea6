# Compiled hot kernels: tridiagonal solve, monotone projection, Sturm counts.
# Mirrors the signatures in _kernels_py.

import numpy as np

cimport numpy as cnp

cnp.import_array()


def thomas(const double[::1] sub, const double[::1] diag, const double[::1] sup, const double[::1] rhs):
    """Solve the tridiagonal system (no pivoting; diagonally dominant input)."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef cnp.ndarray[double, ndim=1] x = np.empty(n)
    cdef double[::1] xv = x
    cdef double[::1] c = np.empty(n - 1)
    cdef double[::1] d = np.empty(n)
    cdef Py_ssize_t i
    cdef double piv

    piv = diag[0]
    if piv == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    c[0] = sup[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, n - 1):
        piv = diag[i] - sub[i - 1] * c[i - 1]
        if piv == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        c[i] = sup[i] / piv
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / piv
    piv = diag[n - 1] - sub[n - 2] * c[n - 2]
    if piv == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    d[n - 1] = (rhs[n - 1] - sub[n - 2] * d[n - 2]) / piv

    xv[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        xv[i] = d[i] - c[i] * xv[i + 1]
    return x


def pav_nondecreasing(const double[::1] y, const double[::1] w):
    """Weighted isotonic regression (pool adjacent violators)."""
    cdef Py_ssize_t n = y.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double[::1] val = np.empty(n)
    cdef double[::1] wt = np.empty(n)
    cdef Py_ssize_t[::1] start = np.empty(n + 1, dtype=np.intp)
    cdef Py_ssize_t i, j, m = 0
    cdef double tot

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
    for j in range(m):
        for i in range(start[j], start[j + 1]):
            out[i] = val[j]
    return out


def sturm_count(const double[::1] diag, const double[::1] off, double x):
    """Number of eigenvalues of the symmetric tridiagonal matrix below x."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i, count = 0
    cdef double q = diag[0] - x

    if q < 0.0:
        count += 1
    for i in range(1, n):
        if q == 0.0:
            q = 1e-300
        q = diag[i] - x - off[i - 1] * off[i - 1] / q
        if q < 0.0:
            count += 1
    return count

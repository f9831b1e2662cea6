"""Both kernel backends must agree with each other and with dense oracles."""

import numpy as np
import pytest

from radial_lab import _kernels_py, kernels

try:
    from radial_lab import _kernels_cy
except ImportError:
    _kernels_cy = None

BACKENDS = [_kernels_py] + ([_kernels_cy] if _kernels_cy else [])


def _tridiag_dense(sub, diag, sup):
    n = len(diag)
    A = np.diag(diag)
    A += np.diag(sub, -1)
    A += np.diag(sup, 1)
    return A


@pytest.mark.parametrize("impl", BACKENDS)
def test_thomas_matches_dense_solve(impl):
    rng = np.random.default_rng(3)
    for n in (5, 64, 513):
        sub = -rng.uniform(0.2, 1.0, n - 1)
        sup = -rng.uniform(0.2, 1.0, n - 1)
        diag = 2.2 + rng.uniform(0.0, 1.0, n)
        rhs = rng.standard_normal(n)
        x = impl.thomas(sub, diag, sup, rhs)
        expected = np.linalg.solve(_tridiag_dense(sub, diag, sup), rhs)
        assert np.allclose(x, expected, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS)
def test_pav_worked_example(impl):
    out = impl.pav_nondecreasing(np.array([0.2, 0.5, 0.4, 0.7]), np.ones(4))
    assert np.allclose(out, [0.2, 0.45, 0.45, 0.7], atol=1e-15)


@pytest.mark.parametrize("impl", BACKENDS)
def test_pav_weighted_against_sklearn(impl):
    from oracles import isotonic_oracle

    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(2, 80))
        y = rng.standard_normal(n) * rng.uniform(0.1, 5.0)
        w = rng.uniform(1e-3, 2.0, n)
        out = impl.pav_nondecreasing(y, w)
        assert np.all(np.diff(out) >= 0.0)
        assert np.allclose(out, isotonic_oracle(y, w), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS)
def test_sturm_count_matches_eigvalsh(impl):
    rng = np.random.default_rng(7)
    for n in (8, 60):
        diag = rng.standard_normal(n)
        off = rng.standard_normal(n - 1)
        A = _tridiag_dense(off, diag, off)
        eigs = np.linalg.eigvalsh(A)
        for x in np.linspace(eigs[0] - 0.5, eigs[-1] + 0.5, 17):
            assert impl.sturm_count(diag, off, x) == int(np.sum(eigs < x))


@pytest.mark.skipif(_kernels_cy is None, reason="extension not built")
def test_backends_agree():
    rng = np.random.default_rng(5)
    n = 321
    sub = -rng.uniform(0.2, 1.0, n - 1)
    sup = -rng.uniform(0.2, 1.0, n - 1)
    diag = 2.5 + rng.uniform(0.0, 1.0, n)
    rhs = rng.standard_normal(n)
    assert np.allclose(_kernels_py.thomas(sub, diag, sup, rhs),
                       _kernels_cy.thomas(sub, diag, sup, rhs), rtol=1e-13)
    y = np.cumsum(rng.standard_normal(n))
    w = rng.uniform(0.1, 1.0, n)
    assert np.allclose(_kernels_py.pav_nondecreasing(y, w),
                       _kernels_cy.pav_nondecreasing(y, w), rtol=1e-13)
    assert (_kernels_py.sturm_count(diag, sub, 2.0)
            == _kernels_cy.sturm_count(diag, sub, 2.0))


def test_dispatch_accepts_readonly_arrays():
    y = np.array([3.0, 1.0, 2.0])
    w = np.array([1.0, 1.0, 1.0])
    y.flags.writeable = False
    w.flags.writeable = False
    out = kernels.pav_nondecreasing(y, w)
    assert np.all(np.diff(out) >= 0.0)

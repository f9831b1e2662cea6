"""Independent reference computations used by the tests.

Everything here deliberately avoids the package's own numerics: shooting
integrates the radial ODE as an initial value problem, the isotonic oracle
comes from scikit-learn, eigenvalue targets from special-function roots.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import jn_zeros


def lambda2_target(N: int) -> float:
    """Second radial Neumann eigenvalue of -Lap + 1 on the unit ball."""
    if N == 2:
        return 1.0 + jn_zeros(1, 1)[0] ** 2
    if N == 3:
        kappa = brentq(lambda x: math.tan(x) - x, 3.6, 4.6, xtol=1e-14)
        return 1.0 + kappa * kappa
    raise ValueError(f"no closed-form target for N = {N}")


def shoot_ivp(N, a_fn, f_fn, s, b_fn=None, rtol=1e-11):
    """Integrate the radial equation from the center with u(0) = s, u'(0) = 0."""
    b_fn = b_fn or (lambda r: 0.0)

    def rhs(r, y):
        u, p = y
        return [p, (b_fn(r) * r - (N - 1) / r) * p + u - a_fn(r) * f_fn(u)]

    r0 = 1e-9
    upp0 = (s - a_fn(0.0) * f_fn(s)) / N
    return solve_ivp(rhs, [r0, 1.0], [s + 0.5 * upp0 * r0 * r0, upp0 * r0],
                     rtol=rtol, atol=1e-13, dense_output=True, method="DOP853")


def shooting_profile(N, a_fn, f_fn, nodes, bracket, b_fn=None):
    """Neumann solution by bisecting the boundary slope over u(0) in bracket."""

    def phi(s):
        sol = shoot_ivp(N, a_fn, f_fn, s, b_fn)
        return sol.y[1, -1]

    s_star = brentq(phi, *bracket, xtol=1e-13)
    sol = shoot_ivp(N, a_fn, f_fn, s_star, b_fn)
    rr = np.maximum(np.asarray(nodes), 1e-9)
    return s_star, sol.sol(rr)[0]


def shooting_bracket(N, a_fn, f_fn, s_lo, s_hi, count=40, b_fn=None):
    """Scan u(0) for a sign change of the boundary slope."""
    svals = np.linspace(s_lo, s_hi, count)
    prev_s, prev_phi = None, None
    for s in svals:
        sol = shoot_ivp(N, a_fn, f_fn, s, b_fn, rtol=1e-8)
        if not sol.success:
            prev_s, prev_phi = None, None
            continue
        phi = sol.y[1, -1]
        if prev_phi is not None and prev_phi * phi < 0:
            return (prev_s, s)
        prev_s, prev_phi = s, phi
    raise RuntimeError("no shooting bracket found")


def isotonic_oracle(values, weights):
    from sklearn.isotonic import isotonic_regression

    return isotonic_regression(np.asarray(values, dtype=float),
                               sample_weight=np.asarray(weights, dtype=float),
                               increasing=True)

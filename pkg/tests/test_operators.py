"""Assembly, the drift hypothesis gate, the linear solve, and eigenpairs."""

import math

import numpy as np
import pytest
from scipy.special import iv

from radial_lab.cone import check_cone
from radial_lab.errors import HypothesisError, ParameterError
from radial_lab.geometry import build_grid, constant, grid_function, integrate, norm
from radial_lab.linear_operator import (DriftSpec, ZERO_DRIFT, assemble,
                                        apply_operator, radial_eigs, solve_T,
                                        symmetric_operator, validate_drift)
from radial_lab.sampling import random_cone_function, random_valid_drift

from oracles import lambda2_target


def test_constants_are_fixed_points():
    for N in (2, 3):
        g = build_grid(N, 256)
        op = symmetric_operator(g)
        v = solve_T(op, constant(g, 3.0))
        assert np.allclose(v.values, 3.0, atol=1e-11)
        drift = DriftSpec(b=lambda r: -0.5 * r, label="-r/2")
        opd = assemble(g, drift)
        v = solve_T(opd, constant(g, -1.5))
        assert np.allclose(v.values, -1.5, atol=1e-11)


def test_drift_hypothesis_gate():
    g = build_grid(2, 64)
    # constant nonpositive drifts keep a margin of (N-1)/r^2 and are admissible
    cert = validate_drift(DriftSpec(b=lambda r: -np.ones_like(r)), g)
    assert cert.valid
    assemble(g, DriftSpec(b=lambda r: -np.ones_like(r), label="-1"))
    # the worked admissible example
    assemble(g, DriftSpec(b=lambda r: -0.5 * r, label="-r/2"))
    # steep drift violating the derivative bound near r = 1
    with pytest.raises(HypothesisError, match="derivative condition"):
        assemble(g, DriftSpec(b=lambda r: -3.0 * r, label="-3r"))
    # positivity violation
    with pytest.raises(HypothesisError, match="nonpositive"):
        assemble(g, DriftSpec(b=lambda r: 0.1 * np.ones_like(r), label="0.1"))


def test_solve_matches_eigen_decomposition():
    g = build_grid(2, 512)
    op = symmetric_operator(g)
    pairs = radial_eigs(g, 2)
    lam2, v2 = pairs[1].value, pairs[1].function
    image = solve_T(op, v2)
    assert np.allclose(image.values, v2.values / lam2, atol=1e-12)


def test_solve_matches_bessel_closed_form():
    # -Lap v + v = r^2 on the disc: v = r^2 + 4 - 2 I0(r)/I1(1)
    g = build_grid(2, 2048)
    sol = solve_T(symmetric_operator(g), grid_function(g, lambda r: r**2))
    exact = g.nodes**2 + 4.0 - 2.0 * iv(0, g.nodes) / iv(1, 1.0)
    assert np.max(np.abs(sol.values - exact)) < 1e-5
    assert sol.values[0] == pytest.approx(0.4611735, abs=1e-4)


def test_solve_weak_residual_contract():
    rng = np.random.default_rng(1)
    g = build_grid(3, 512)
    op = assemble(g, random_valid_drift(g, rng))
    q = g.weights
    for _ in range(10):
        w = random_cone_function(g, rng, scale=2.0)
        v = solve_T(op, w)
        weak = op.diag * v.values
        weak[:-1] += op.sup * v.values[1:]
        weak[1:] += op.sub * v.values[:-1]
        weak -= q * w.values
        assert np.max(np.abs(weak)) <= 1e-12 * (1.0 + norm(w, "Linf"))


def test_solve_linearity():
    rng = np.random.default_rng(6)
    g = build_grid(2, 256)
    op = assemble(g, random_valid_drift(g, rng))
    w1 = random_cone_function(g, rng).values
    w2 = random_cone_function(g, rng).values
    a, b = 1.7, -0.3
    from radial_lab.linear_operator import solve_values

    combined = solve_values(op, a * w1 + b * w2)
    split = a * solve_values(op, w1) + b * solve_values(op, w2)
    assert np.allclose(combined, split, atol=1e-11)


def test_cone_invariance_sample():
    rng = np.random.default_rng(12)
    g = build_grid(2, 256)
    for _ in range(3):
        op = assemble(g, random_valid_drift(g, rng))
        for _ in range(40):
            w = random_cone_function(g, rng, scale=float(rng.uniform(0.1, 5.0)))
            rep = check_cone(solve_T(op, w), tol=1e-10)
            assert rep.in_cone


def test_eigenvalues_against_targets():
    for N in (2, 3):
        g = build_grid(N, 2048)
        pairs = radial_eigs(g, 2)
        assert pairs[0].value == pytest.approx(1.0, abs=1e-6)
        assert abs(pairs[1].value - lambda2_target(N)) < 1e-3
        v2 = pairs[1].function
        assert norm(v2, "L2") == pytest.approx(1.0, rel=1e-10)
        assert v2.values[-1] > 0.0
        assert abs(integrate(v2)) < 1e-8
        assert np.max(v2.values[:-1] - v2.values[1:]) <= 1e-10


def test_eigenvalue_grid_convergence():
    errs = []
    for n in (256, 512, 1024):
        g = build_grid(2, n)
        errs.append(abs(radial_eigs(g, 2)[1].value - lambda2_target(2)))
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] / errs[2] >= 3.5


def test_rayleigh_quotient_consistency():
    n = 512
    g = build_grid(2, n)
    pairs = radial_eigs(g, 2)
    v2 = pairs[1].function
    rayleigh = norm(v2, "H1") ** 2 / norm(v2, "L2") ** 2
    assert abs(rayleigh - pairs[1].value) <= 10.0 / n**2 * pairs[1].value


def test_eig_parameter_errors():
    g = build_grid(2, 64)
    with pytest.raises(ParameterError):
        radial_eigs(g, 7)
    with pytest.raises(ParameterError):
        radial_eigs(g, 0)
    with pytest.raises(ParameterError):
        radial_eigs(build_grid(2, 8), 6)


def test_condition_bounded_over_drifts():
    rng = np.random.default_rng(3)
    g = build_grid(2, 128)
    conds = []
    for _ in range(10):
        op = assemble(g, random_valid_drift(g, rng))
        A = (np.diag(op.diag) + np.diag(op.sub, -1) + np.diag(op.sup, 1))
        conds.append(np.linalg.cond(A))
    assert max(conds) < 1e9
    assert max(conds) / min(conds) < 10.0


def test_apply_operator_consistent_with_solve():
    g = build_grid(3, 256)
    op = symmetric_operator(g)
    w = grid_function(g, lambda r: 1.0 + r**3)
    v = solve_T(op, w)
    back = apply_operator(op, v.values)
    assert np.max(np.abs(back - w.values)) < 1e-8

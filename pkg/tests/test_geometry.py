"""Grid construction, quadrature, norms, and the nodal derivative."""

import math

import numpy as np
import pytest

from radial_lab.errors import ParameterError
from radial_lab.geometry import (build_grid, constant, grid_function, integrate,
                                 norm, radial_derivative, wrap)


def test_grid_nodes_and_weights():
    g = build_grid(2, 8)
    assert np.allclose(g.nodes, np.arange(9) / 8)
    assert g.sphere_area == pytest.approx(2 * math.pi)
    assert np.all(g.weights >= 0.0)
    # exact ball volume and the degenerate center weight of order n^-N
    assert integrate(constant(g, 1.0)) == pytest.approx(math.pi, rel=1e-14)
    assert 0.0 < g.weights[0] < g.sphere_area * g.spacing**2


def test_ball_volume_dimension_three():
    g = build_grid(3, 8)
    assert integrate(constant(g, 1.0)) == pytest.approx(4 * math.pi / 3, rel=1e-14)


def test_grid_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        build_grid(2, 3)
    with pytest.raises(ParameterError):
        build_grid(2, 7)
    with pytest.raises(ParameterError):
        build_grid(1, 64)


def test_integrate_closed_forms():
    g = build_grid(2, 1024)
    assert integrate(grid_function(g, lambda r: r**2)) == pytest.approx(
        math.pi / 2, rel=1e-5)
    g3 = build_grid(3, 1024)
    assert integrate(grid_function(g3, lambda r: r)) == pytest.approx(
        math.pi, rel=1e-5)


def test_quadrature_second_order():
    # halving the mesh must cut the r^k error by at least 3.5 for k <= 3
    for k, exact in ((2, math.pi / 2), (3, 2 * math.pi / 5)):
        errs = []
        for n in (128, 256, 512):
            g = build_grid(2, n)
            errs.append(abs(integrate(grid_function(g, lambda r: r**k)) - exact))
        assert errs[0] / errs[1] >= 3.5
        assert errs[1] / errs[2] >= 3.5


def test_norm_constants():
    g = build_grid(2, 64)
    u = constant(g, -2.5)
    assert norm(u, "Linf") == pytest.approx(2.5)
    assert norm(u, "L2") == pytest.approx(2.5 * math.sqrt(math.pi), rel=1e-14)
    z = constant(g, 0.0)
    for kind in ("L1", "L2", "Linf", "H1", "W11"):
        assert norm(z, kind) == 0.0


def test_h1_of_linear_profile():
    g = build_grid(2, 2048)
    u = grid_function(g, lambda r: r)
    # grad has unit modulus, so H1^2 = |B| + int r^2
    assert norm(u, "H1") ** 2 == pytest.approx(math.pi + math.pi / 2, rel=1e-5)


def test_norm_homogeneity_and_chain():
    rng = np.random.default_rng(0)
    g = build_grid(2, 128)
    root_ball = math.sqrt(g.ball_volume)
    for _ in range(50):
        u = wrap(g, rng.standard_normal(g.intervals + 1))
        c = float(rng.uniform(0.1, 10.0))
        assert norm(wrap(g, c * u.values), "H1") == pytest.approx(
            c * norm(u, "H1"), rel=1e-12)
        assert norm(u, "L1") <= root_ball * norm(u, "L2") * (1 + 1e-12)
        assert root_ball * norm(u, "L2") <= g.ball_volume * norm(u, "Linf") * (1 + 1e-12)


def test_derivative_exactness():
    g = build_grid(2, 64)
    assert np.max(np.abs(radial_derivative(constant(g, 4.0)).values)) == 0.0
    lin = radial_derivative(grid_function(g, lambda r: r))
    assert np.allclose(lin.values, 1.0, atol=1e-12)
    g = build_grid(2, 1024)
    quad = radial_derivative(grid_function(g, lambda r: r**2))
    assert np.max(np.abs(quad.values - 2 * g.nodes)) < 1e-4


def test_values_validated():
    g = build_grid(2, 8)
    with pytest.raises(ParameterError):
        wrap(g, np.ones(5))
    with pytest.raises(ParameterError):
        wrap(g, [math.nan] + [0.0] * 8)

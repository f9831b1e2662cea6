"""Cone membership reporting and the weighted monotone projection."""

import math

import numpy as np
import pytest

from radial_lab.cone import (ConeWindow, check_cone, project_to_cone,
                             project_to_window)
from radial_lab.errors import ParameterError
from radial_lab.geometry import build_grid, constant, grid_function, wrap
from radial_lab.nonlinearity import power_family
from radial_lab.sampling import random_cone_values

from oracles import isotonic_oracle


@pytest.fixture(scope="module")
def grid():
    return build_grid(2, 64)


def test_check_cone_examples(grid):
    assert check_cone(grid_function(grid, lambda r: r**2)).in_cone
    rep = check_cone(grid_function(grid, lambda r: 1 - r))
    assert not rep.in_cone
    assert rep.max_monotonicity_violation == pytest.approx(grid.spacing)
    rep = check_cone(constant(grid, -0.5))
    assert not rep.in_cone
    assert rep.min_value == -0.5


def test_check_cone_window(grid):
    win = ConeWindow(1.0, 2.0, 3.0)
    assert check_cone(constant(grid, 2.5), win).in_window
    assert not check_cone(constant(grid, 0.5), win).in_window
    assert not check_cone(constant(grid, 3.5), win).in_window
    unbounded = ConeWindow(0.0, 1.0, math.inf)
    assert check_cone(constant(grid, 100.0), unbounded).in_window


def test_window_validation():
    with pytest.raises(ParameterError):
        ConeWindow(2.0, 2.0, 3.0)
    with pytest.raises(ParameterError):
        ConeWindow(-1.0, 0.5, 2.0)


def test_projection_idempotent_bitwise(grid):
    win = ConeWindow(0.0, 1.0, math.inf, source=power_family(20))
    u = grid_function(grid, lambda r: 0.2 + r**3)
    assert project_to_window(u, win) is u
    # clamp dominates for a profile below the window floor
    low = constant(grid, -1.0)
    out = project_to_window(low, ConeWindow(0.5, 1.0, 2.0))
    assert np.all(out.values == 0.5)


def test_projection_matches_weighted_oracle(grid):
    rng = np.random.default_rng(2)
    win = ConeWindow(0.0, 1.0, math.inf)
    for _ in range(30):
        u = wrap(grid, rng.standard_normal(grid.intervals + 1) + 0.3)
        mine = project_to_window(u, win).values
        ref = np.maximum(isotonic_oracle(u.values, grid.weights), 0.0)
        assert np.allclose(mine, ref, rtol=1e-10, atol=1e-12)


def test_projection_bounded_window_oracle(grid):
    rng = np.random.default_rng(9)
    win = ConeWindow(1.0, 2.0, 3.0)
    for _ in range(20):
        u = wrap(grid, 2.0 + 1.5 * rng.standard_normal(grid.intervals + 1))
        mine = project_to_window(u, win).values
        ref = np.clip(isotonic_oracle(u.values, grid.weights), 1.0, 3.0)
        assert np.allclose(mine, ref, rtol=1e-10, atol=1e-12)
        assert check_cone(wrap(grid, mine), win, tol=0.0).in_window


def test_projection_nonexpansive(grid):
    rng = np.random.default_rng(4)
    win = ConeWindow(0.0, 1.0, math.inf)
    q = grid.weights

    def dist(x, y):
        return math.sqrt(float(q @ (x - y) ** 2))

    for _ in range(40):
        u = rng.standard_normal(grid.intervals + 1)
        v = rng.standard_normal(grid.intervals + 1)
        pu = project_to_window(wrap(grid, u), win).values
        pv = project_to_window(wrap(grid, v), win).values
        assert dist(pu, pv) <= dist(u, v) * (1 + 1e-12) + 1e-14


def test_projection_beats_random_feasible_points(grid):
    # optimality: no sampled feasible point is closer in the weighted metric
    rng = np.random.default_rng(8)
    win = ConeWindow(0.5, 1.5, 4.0)
    q = grid.weights
    u = rng.standard_normal(grid.intervals + 1) * 2.0 + 1.0
    proj = project_to_window(wrap(grid, u), win).values
    best = float(q @ (proj - u) ** 2)
    for _ in range(200):
        cand = np.clip(np.sort(random_cone_values(grid, rng, scale=3.0) + 0.5),
                       0.5, 4.0)
        assert float(q @ (cand - u) ** 2) >= best - 1e-12


def test_project_to_cone(grid):
    u = grid_function(grid, lambda r: np.sin(6 * r) - 0.2)
    out = project_to_cone(u)
    rep = check_cone(out, tol=0.0)
    assert rep.in_cone and rep.min_value >= 0.0

"""Radial grid, weighted quadrature, norms and discrete radial calculus.

Functions on the unit ball in R^N are represented by their nodal values on a
uniform grid of [0, 1]; integrals carry the surface measure, so that
sum(q_i * u_i) approximates the volume integral of u over the ball.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

MIN_DIMENSION = 2
MIN_INTERVALS = 8

_NORM_KINDS = ("L1", "L2", "Linf", "H1", "W11")


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial grid with quadrature weights for the ball measure.

    weights[i] integrates the piecewise-linear hat at node i against the
    density sphere_area * r^(N-1), so the weights sum exactly to the ball
    volume and the center node keeps a tiny positive weight of order n^-N.
    """

    dimension: int
    intervals: int
    nodes: np.ndarray
    sphere_area: float
    weights: np.ndarray

    @property
    def spacing(self) -> float:
        return 1.0 / self.intervals

    @property
    def ball_volume(self) -> float:
        return self.sphere_area / self.dimension


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Nodal values of a radial function on a grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.intervals + 1,):
            raise ParameterError(
                f"expected {self.grid.intervals + 1} nodal values, got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ParameterError("nodal values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def build_grid(N: int, n: int) -> RadialGrid:
    """Build the uniform grid with n intervals on [0, 1] in dimension N."""
    if not (isinstance(N, (int, np.integer)) and N >= MIN_DIMENSION):
        raise ParameterError(f"dimension must be an integer >= {MIN_DIMENSION}, got {N}")
    if not (isinstance(n, (int, np.integer)) and n >= MIN_INTERVALS):
        raise ParameterError(f"intervals must be an integer >= {MIN_INTERVALS}, got {n}")
    N = int(N)
    n = int(n)
    nodes = np.arange(n + 1) / n
    omega = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    h = 1.0 / n
    a = nodes[:-1]
    b = nodes[1:]
    # exact moments of r^(N-1) over each cell
    p = (b**N - a**N) / N
    q = (b ** (N + 1) - a ** (N + 1)) / (N + 1)
    weights = np.zeros(n + 1)
    weights[:-1] += (b * p - q) / h
    weights[1:] += (q - a * p) / h
    weights *= omega
    weights.flags.writeable = False
    nodes.flags.writeable = False
    return RadialGrid(dimension=N, intervals=n, nodes=nodes,
                      sphere_area=omega, weights=weights)


def grid_function(grid: RadialGrid, fn) -> RadialFunction:
    """Sample a callable of r on the grid nodes."""
    return RadialFunction(grid, np.asarray(fn(grid.nodes), dtype=np.float64))


def constant(grid: RadialGrid, c: float) -> RadialFunction:
    return RadialFunction(grid, np.full(grid.intervals + 1, float(c)))


def wrap(grid: RadialGrid, values) -> RadialFunction:
    return RadialFunction(grid, np.asarray(values, dtype=np.float64))


def integrate(u: RadialFunction) -> float:
    """Volume integral of u over the ball."""
    return float(u.grid.weights @ u.values)


def derivative_values(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Second-order nodal derivative: centered inside, one-sided at the ends."""
    h = grid.spacing
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    d[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    return d


def radial_derivative(u: RadialFunction) -> RadialFunction:
    return RadialFunction(u.grid, derivative_values(u.grid, u.values))


def norm(u: RadialFunction, kind: str) -> float:
    """Norm of u: one of L1, L2, Linf, H1, W11 (H1/W11 use the nodal derivative)."""
    if kind not in _NORM_KINDS:
        raise ParameterError(f"unknown norm kind {kind!r}, expected one of {_NORM_KINDS}")
    q = u.grid.weights
    v = u.values
    if kind == "Linf":
        return float(np.max(np.abs(v)))
    if kind == "L1":
        return float(q @ np.abs(v))
    if kind == "L2":
        return float(math.sqrt(q @ (v * v)))
    d = derivative_values(u.grid, v)
    if kind == "H1":
        return float(math.sqrt(q @ (v * v) + q @ (d * d)))
    return float(q @ np.abs(v) + q @ np.abs(d))

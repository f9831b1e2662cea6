"""Seeded random generators for cone functions and admissible drifts."""

import numpy as np

from .errors import RadialLabError
from .geometry import RadialFunction, RadialGrid
from .linear_operator import DriftSpec, validate_drift


def random_cone_values(grid: RadialGrid, rng: np.random.Generator,
                       scale: float = 1.0, base: float | None = None) -> np.ndarray:
    """Random nonnegative nondecreasing profile.

    Cumulative sums of nonnegative increments with random plateaus and a
    random moving-average smoothing, covering near-constant through
    near-step shapes.
    """
    n = grid.intervals
    inc = rng.exponential(1.0, size=n)
    inc *= rng.random(n) < rng.uniform(0.05, 1.0)  # random plateaus
    u = np.concatenate(([0.0], np.cumsum(inc)))
    width = rng.integers(1, max(2, n // 8))
    if width > 1:
        kernel = np.ones(width) / width
        u = np.convolve(u, kernel, mode="full")[: n + 1]
        u.sort()
    top = u[-1]
    if top > 0.0:
        u *= rng.uniform(0.1, 1.0) * scale / top
    if base is None:
        base = rng.uniform(0.0, 0.5) * scale
    return u + base


def random_cone_function(grid: RadialGrid, rng: np.random.Generator,
                         scale: float = 1.0) -> RadialFunction:
    return RadialFunction(grid, random_cone_values(grid, rng, scale))


def random_valid_drift(grid: RadialGrid, rng: np.random.Generator) -> DriftSpec:
    """Random polynomial drift satisfying the nonpositivity/derivative bounds."""
    N = grid.dimension
    for _ in range(100):
        c = rng.random(3)
        c /= c.sum()
        beta = rng.uniform(0.0, N / 3.0)
        c0, c1, c2 = beta * c

        drift = DriftSpec(
            b=lambda r, c0=c0, c1=c1, c2=c2: -(c0 + c1 * r + c2 * r * r),
            label=f"-({c0:.3f}+{c1:.3f}r+{c2:.3f}r^2)",
        )
        cert = validate_drift(drift, grid)
        if cert.valid:
            return drift
    raise RadialLabError("could not sample a valid drift")

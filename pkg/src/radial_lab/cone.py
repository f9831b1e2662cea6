"""Membership tests and projection for the cone of nonnegative nondecreasing
radial functions, optionally windowed between two fixed points.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError
from .geometry import RadialFunction

#: default tolerance for cone certificates
CONE_TOL = 1e-10


@dataclass(frozen=True)
class ConeWindow:
    """Order window [u_minus, u_plus] around an unstable fixed point u_zero.

    u_plus may be math.inf (no upper fixed point). `source` keeps a reference
    to the nonlinearity the window was derived from.
    """

    u_minus: float
    u_zero: float
    u_plus: float
    source: object = None

    def __post_init__(self):
        if not (0.0 <= self.u_minus < self.u_zero < self.u_plus):
            raise ParameterError(
                f"window must satisfy 0 <= u_minus < u_zero < u_plus, got "
                f"({self.u_minus}, {self.u_zero}, {self.u_plus})"
            )

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.u_plus)


@dataclass(frozen=True)
class ConeReport:
    in_cone: bool
    min_value: float
    max_monotonicity_violation: float
    in_window: bool | None = None


def check_cone(u: RadialFunction, window: ConeWindow | None = None,
               tol: float = CONE_TOL) -> ConeReport:
    """Report nonnegativity/monotonicity violations, and window membership."""
    if tol < 0.0:
        raise ParameterError("tolerance must be nonnegative")
    v = u.values
    min_value = float(np.min(v))
    diffs = v[:-1] - v[1:]
    violation = float(max(0.0, np.max(diffs)))
    in_cone = (min_value >= -tol) and (violation <= tol)
    in_window = None
    if window is not None:
        lo_ok = min_value >= window.u_minus - tol
        hi_ok = (not window.bounded) or float(np.max(v)) <= window.u_plus + tol
        in_window = bool(in_cone and lo_ok and hi_ok)
    return ConeReport(in_cone=in_cone, min_value=min_value,
                      max_monotonicity_violation=violation, in_window=in_window)


def project_values(grid_weights: np.ndarray, values: np.ndarray,
                   lo: float = 0.0, hi: float = math.inf) -> np.ndarray:
    """Weighted-L2 projection onto nondecreasing sequences, then box clamp.

    Clamping the isotonic solution is the exact projection onto the
    intersection of the monotone cone with the box [lo, hi].
    """
    out = kernels.pav_nondecreasing(values, grid_weights)
    if lo > -math.inf:
        np.maximum(out, lo, out=out)
    if hi < math.inf:
        np.minimum(out, hi, out=out)
    return out


def project_to_window(u: RadialFunction, window: ConeWindow) -> RadialFunction:
    """Closest window member in the weighted L2(B) metric; idempotent."""
    if check_cone(u, window, tol=0.0).in_window:
        return u
    hi = window.u_plus if window.bounded else math.inf
    out = project_values(u.grid.weights, u.values, lo=window.u_minus, hi=hi)
    return RadialFunction(u.grid, out)


def project_to_cone(u: RadialFunction) -> RadialFunction:
    """Projection onto the plain cone (window [0, inf))."""
    rep = check_cone(u, tol=0.0)
    if rep.in_cone:
        return u
    return RadialFunction(u.grid, project_values(u.grid.weights, u.values))

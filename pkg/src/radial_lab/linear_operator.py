"""Discretization of the radial Neumann operator -Lap(u) + b(r) r u' + u.

The diffusion part is assembled in conservative flux form with exact
half-cell coefficients, so with zero drift the matrix is symmetric in the
grid's weighted inner product, constants are reproduced exactly, and zero
boundary flux encodes the Neumann conditions. The drift uses centered
differences; it vanishes at r=0 and, through the boundary condition, at r=1.
"""

import math
import weakref
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import HypothesisError, NumericError, ParameterError
from .geometry import RadialFunction, RadialGrid

#: hypothesis margins below this are treated as violations (strict inequality)
STRICTNESS = 1e-8

#: hypothesis sampling density, in points per grid interval
SAMPLES_PER_CELL = 10


@dataclass(frozen=True)
class DriftSpec:
    """Radial drift coefficient b(r) <= 0 with a one-sided derivative bound."""

    b: object  # callable r -> b(r), vectorized
    label: str = "custom"


@dataclass(frozen=True)
class WeightSpec:
    """Nondecreasing weight a(r) with a(0) > 0."""

    a: object  # callable r -> a(r), vectorized
    label: str = "custom"

    @property
    def a0(self) -> float:
        return float(np.asarray(self.a(np.array([0.0])))[0])

    @property
    def a1(self) -> float:
        return float(np.asarray(self.a(np.array([1.0])))[0])


ZERO_DRIFT = DriftSpec(b=lambda r: np.zeros_like(r), label="0")
UNIT_WEIGHT = WeightSpec(a=lambda r: np.ones_like(r), label="1")


@dataclass(frozen=True)
class DriftCertificate:
    max_b: float
    min_margin: float
    argmin_r: float

    @property
    def valid(self) -> bool:
        return self.max_b <= 0.0 and self.min_margin > STRICTNESS


def validate_drift(drift: DriftSpec, grid: RadialGrid) -> DriftCertificate:
    """Sample the drift hypothesis: b <= 0 and (b(r)r)' > -1 - (N-1)/r^2."""
    n_samples = SAMPLES_PER_CELL * grid.intervals
    r = np.linspace(0.0, 1.0, n_samples + 1)[1:]
    b = np.asarray(drift.b(r), dtype=np.float64)
    max_b = float(np.max(b))
    delta = 0.5 / n_samples
    rp = np.minimum(r + delta, 1.0)
    rm = np.maximum(r - delta, 0.0)
    g_prime = (np.asarray(drift.b(rp)) * rp - np.asarray(drift.b(rm)) * rm) / (rp - rm)
    margin = g_prime + 1.0 + (grid.dimension - 1) / (r * r)
    k = int(np.argmin(margin))
    return DriftCertificate(max_b=max_b, min_margin=float(margin[k]),
                            argmin_r=float(r[k]))


def validate_weight(weight: WeightSpec, grid: RadialGrid) -> None:
    r = np.linspace(0.0, 1.0, SAMPLES_PER_CELL * grid.intervals + 1)
    a = np.asarray(weight.a(r), dtype=np.float64)
    if a[0] <= 0.0:
        raise HypothesisError(f"weight must satisfy a(0) > 0, got a(0) = {a[0]}")
    drops = a[:-1] - a[1:]
    k = int(np.argmax(drops))
    if drops[k] > STRICTNESS:
        raise HypothesisError(
            f"weight must be nondecreasing; a drops by {drops[k]:.3e} at r = {r[k + 1]:.6f}"
        )


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Tridiagonal system S v = M w for the operator, with S = K + drift + M."""

    grid: RadialGrid
    drift: DriftSpec
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray


_flux_cache: "weakref.WeakKeyDictionary[RadialGrid, np.ndarray]" = weakref.WeakKeyDictionary()
_symmetric_cache: "weakref.WeakKeyDictionary[RadialGrid, DiscreteOperator]" = weakref.WeakKeyDictionary()


def flux_coefficients(grid: RadialGrid) -> np.ndarray:
    """Half-cell diffusion coefficients c_i coupling nodes i and i+1."""
    c = _flux_cache.get(grid)
    if c is None:
        N = grid.dimension
        rn = grid.nodes**N
        c = grid.sphere_area * (rn[1:] - rn[:-1]) / (N * grid.spacing**2)
        c.flags.writeable = False
        _flux_cache[grid] = c
    return c


def assemble(grid: RadialGrid, drift: DriftSpec) -> DiscreteOperator:
    """Assemble the tridiagonal operator; rejects drifts violating the hypothesis."""
    cert = validate_drift(drift, grid)
    if cert.max_b > 0.0:
        raise HypothesisError(f"drift must be nonpositive, max b = {cert.max_b:.3e}")
    if cert.min_margin <= STRICTNESS:
        raise HypothesisError(
            f"drift derivative condition fails at r = {cert.argmin_r:.6f} "
            f"(margin {cert.min_margin:.3e})"
        )
    c = flux_coefficients(grid)
    q = grid.weights
    n = grid.intervals
    diag = np.zeros(n + 1)
    diag[:-1] += c
    diag[1:] += c
    diag += q
    sub = -c.copy()
    sup = -c.copy()
    r = grid.nodes
    b = np.asarray(drift.b(r), dtype=np.float64)
    # centered drift at interior nodes; r=0 kills it at the center and the
    # Neumann condition u'(1)=0 at the boundary
    coeff = q[1:-1] * b[1:-1] * r[1:-1] / (2.0 * grid.spacing)
    sup[1:] += coeff
    sub[:-1] -= coeff
    return DiscreteOperator(grid=grid, drift=drift, sub=sub, diag=diag, sup=sup)


def symmetric_operator(grid: RadialGrid) -> DiscreteOperator:
    """Cached zero-drift operator (used by the energy and eigen machinery)."""
    op = _symmetric_cache.get(grid)
    if op is None:
        op = assemble(grid, ZERO_DRIFT)
        _symmetric_cache[grid] = op
    return op


def apply_operator(op: DiscreteOperator, values: np.ndarray) -> np.ndarray:
    """Strong-form action (S v) / q, the discrete pointwise operator."""
    out = op.diag * values
    out[:-1] += op.sup * values[1:]
    out[1:] += op.sub * values[:-1]
    return out / op.grid.weights


def solve_values(op: DiscreteOperator, w: np.ndarray) -> np.ndarray:
    try:
        return kernels.thomas(op.sub, op.diag, op.sup, op.grid.weights * w)
    except ZeroDivisionError as exc:
        raise NumericError("singular tridiagonal system") from exc


def solve_T(op: DiscreteOperator, w: RadialFunction) -> RadialFunction:
    """Solve the Neumann problem with right-hand side w."""
    if w.grid is not op.grid:
        raise ParameterError("right-hand side lives on a different grid")
    return RadialFunction(op.grid, solve_values(op, w.values))


def h1_form(grid: RadialGrid, u: np.ndarray, v: np.ndarray) -> float:
    """Discrete H1(B) inner product: mass term plus flux-form Dirichlet term."""
    c = flux_coefficients(grid)
    du = u[1:] - u[:-1]
    dv = v[1:] - v[:-1]
    return float(grid.weights @ (u * v) + c @ (du * dv))


def h1_norm(grid: RadialGrid, u: np.ndarray) -> float:
    return math.sqrt(max(h1_form(grid, u, u), 0.0))


@dataclass(frozen=True, eq=False)
class EigenPair:
    index: int
    value: float
    function: RadialFunction


def radial_eigs(grid: RadialGrid, k_max: int) -> list[EigenPair]:
    """First k_max radial Neumann eigenpairs of -Lap + Id on the ball.

    Generalized symmetric tridiagonal problem (K + M) v = lambda M v, solved
    by Sturm-sequence bisection plus shifted inverse iteration; eigenvalues
    ascend, eigenfunctions have unit L2(B) norm and positive boundary value.
    """
    if not 1 <= k_max <= 6:
        raise ParameterError(f"k_max must be between 1 and 6, got {k_max}")
    if 4 * k_max > grid.intervals:
        raise ParameterError(
            f"k_max = {k_max} exceeds the modes resolvable on {grid.intervals} intervals"
        )
    op = symmetric_operator(grid)
    q = grid.weights
    sq = np.sqrt(q)
    # symmetrized tridiagonal T = D^-1 (K + M) D^-1 with D = diag(sqrt(q))
    tdiag = op.diag / q
    toff = op.sup / (sq[:-1] * sq[1:])
    radius = np.zeros_like(tdiag)
    radius[:-1] += np.abs(toff)
    radius[1:] += np.abs(toff)
    lo = float(np.min(tdiag - radius))
    hi = float(np.max(tdiag + radius))
    rng = np.random.default_rng(748313)
    pairs = []
    for k in range(1, k_max + 1):
        lam = _bisect_eigenvalue(tdiag, toff, k, lo, hi)
        y = _inverse_iteration(tdiag, toff, lam, rng)
        v = y / sq
        if v[-1] < 0.0:
            v = -v
        v /= math.sqrt(q @ (v * v))
        pairs.append(EigenPair(index=k, value=lam, function=RadialFunction(grid, v)))
    return pairs


def _bisect_eigenvalue(tdiag, toff, k, lo, hi):
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if kernels.sturm_count(tdiag, toff, mid) >= k:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def _inverse_iteration(tdiag, toff, lam, rng):
    n = tdiag.shape[0]
    shift = lam * (1.0 + 1e-12) + 1e-300
    y = rng.standard_normal(n)
    y /= np.linalg.norm(y)
    for _ in range(4):
        try:
            y = kernels.thomas(toff, tdiag - shift, toff, y)
        except ZeroDivisionError:
            shift *= 1.0 + 1e-10
            continue
        nrm = np.linalg.norm(y)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise NumericError("inverse iteration failed")
        y /= nrm
    return y

"""Energy functional of the truncated problem, its gradient through the
solution operator, the cutoff normalized descent flow, and the
second-eigenvalue tangent probe.

The discrete energy uses the same quadratic form as the assembled operator,
so u - T(a f(u)) is its exact gradient in the discrete H1 inner product.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cone import ConeWindow, project_values
from .errors import ParameterError
from .geometry import RadialFunction, RadialGrid
from .linear_operator import (EigenPair, WeightSpec, h1_form, h1_norm,
                              solve_values, symmetric_operator)

#: gradient norms below this stop the flow instead of normalizing
GRAD_FLOOR = 1e-8


@dataclass(frozen=True)
class FlowParams:
    """Cutoff descent flow parameters.

    level None disables the cutoff (plain normalized descent, used by the
    minimax bursts); otherwise the flow only acts within 2*epsilon of the
    level and runs for 2*epsilon/delta_grad by default.
    """

    level: float | None
    epsilon: float = 0.1
    delta_grad: float = 1e-3
    step: float = 0.05
    max_duration: float | None = None
    projection_mode: bool = True

    @property
    def duration(self) -> float:
        if self.max_duration is not None:
            return self.max_duration
        return 2.0 * self.epsilon / self.delta_grad


@dataclass(eq=False)
class FlowResult:
    u: RadialFunction
    energies: list
    times: list
    steps: int
    stalled: bool
    reason: str

    @property
    def cone_drift(self) -> float:
        from .cone import check_cone

        rep = check_cone(self.u, tol=0.0)
        return max(0.0, -rep.min_value, rep.max_monotonicity_violation)


def _weight_values(grid: RadialGrid, a: WeightSpec | None) -> np.ndarray:
    if a is None:
        return np.ones(grid.intervals + 1)
    return np.asarray(a.a(grid.nodes), dtype=np.float64)


def energy_values(grid: RadialGrid, ft, u: np.ndarray,
                  a_values: np.ndarray | None = None) -> float:
    quad = 0.5 * h1_form(grid, u, u)
    Fv = np.asarray(ft.F(u))
    if a_values is None:
        return quad - float(grid.weights @ Fv)
    return quad - float(grid.weights @ (a_values * Fv))


def energy(u: RadialFunction, ft, a: WeightSpec | None = None) -> float:
    """I(u) = integral of (|grad u|^2 + u^2)/2 - a F(u) over the ball."""
    return energy_values(u.grid, ft, u.values, None if a is None
                         else _weight_values(u.grid, a))


def gradient_values(grid: RadialGrid, ft, u: np.ndarray,
                    a_values: np.ndarray | None = None) -> np.ndarray:
    w = np.asarray(ft.f(u))
    if a_values is not None:
        w = a_values * w
    return u - solve_values(symmetric_operator(grid), w)


def gradient(u: RadialFunction, ft, a: WeightSpec | None = None) -> RadialFunction:
    """H1 gradient of the energy: u - T(a f(u))."""
    av = None if a is None else _weight_values(u.grid, a)
    return RadialFunction(u.grid, gradient_values(u.grid, ft, u.values, av))


def gradient_norm(u: RadialFunction, ft, a: WeightSpec | None = None) -> float:
    av = None if a is None else _weight_values(u.grid, a)
    return h1_norm(u.grid, gradient_values(u.grid, ft, u.values, av))


def smooth_cutoff(value: float, level: float, epsilon: float) -> float:
    """C2 cutoff: 1 within epsilon of the level, 0 beyond 2 epsilon."""
    d = abs(value - level)
    if d <= epsilon:
        return 1.0
    if d >= 2.0 * epsilon:
        return 0.0
    x = (d - epsilon) / epsilon
    return 1.0 - x * x * x * (10.0 + x * (6.0 * x - 15.0))


def flow(u: RadialFunction, ft, a: WeightSpec | None, params: FlowParams,
         window: ConeWindow | None = None) -> FlowResult:
    """Explicit Euler integration of the cutoff normalized descent flow.

    The step shrinks until no single update raises the energy by more than
    1e-12; each accepted state is projected back into the window when
    projection is on. Integration stops at the duration, at a vanishing
    gradient, on leaving the cutoff band, or when the step underflows.
    """
    grid = u.grid
    av = None if a is None else _weight_values(grid, a)
    lo, hi = 0.0, math.inf
    if window is not None:
        lo = window.u_minus
        hi = window.u_plus if window.bounded else math.inf

    cur = u.values.copy()
    E = energy_values(grid, ft, cur, av)
    if params.level is not None and abs(E - params.level) > 2.0 * params.epsilon:
        return FlowResult(u=u, energies=[E], times=[0.0], steps=0, stalled=False,
                          reason="outside the cutoff band")

    energies = [E]
    times = [0.0]
    t = 0.0
    h = params.step
    steps = 0
    stalled = False
    reason = "duration reached"
    while t < params.duration:
        g = gradient_values(grid, ft, cur, av)
        gn = h1_norm(grid, g)
        if gn < GRAD_FLOOR:
            reason = "gradient below threshold"
            break
        chi = 1.0 if params.level is None else smooth_cutoff(E, params.level,
                                                             params.epsilon)
        if chi == 0.0:
            reason = "left the cutoff band"
            break
        accepted = False
        pinned = False
        while h >= 1e-12:
            # step length capped at the gradient norm: the update then is a
            # convex combination of the state and its operator image, which
            # never overshoots the stationary point
            length = min(h, params.duration - t, gn)
            trial = cur - (length * chi / gn) * g
            if params.projection_mode:
                trial = project_values(grid.weights, trial, lo=lo, hi=hi)
                # a constrained minimizer projects back onto itself
                if float(np.max(np.abs(trial - cur))) \
                        <= 1e-14 * (1.0 + float(np.max(np.abs(cur)))):
                    pinned = True
                    break
            E_t = energy_values(grid, ft, trial, av)
            if E_t <= E + 1e-12:
                cur, E = trial, E_t
                t += length
                h = min(h * 1.1, params.step)
                accepted = True
                break
            h *= 0.5
        steps += 1
        if pinned:
            reason = "pinned by the window constraint"
            break
        if not accepted:
            stalled = True
            reason = "step underflow"
            break
        energies.append(E)
        times.append(t)
    return FlowResult(u=RadialFunction(grid, cur), energies=energies, times=times,
                      steps=steps, stalled=stalled, reason=reason)


@dataclass(frozen=True)
class TangentProbe:
    """Energy response along t (u0 + s v) near the constant critical point."""

    eps1: float
    eps2: float
    s_values: np.ndarray
    g_values: np.ndarray
    gaps: np.ndarray
    curvature: float
    mechanism_present: bool
    failures: tuple

    @property
    def gaps_negative(self) -> bool:
        off = np.abs(self.s_values) > 0.0
        return bool(np.all(self.gaps[off] < 0.0))


def tangent_probe(window: ConeWindow, v2: EigenPair, ft, grid: RadialGrid,
                  eps1: float | None = None, eps2: float = 0.5,
                  samples: int = 21) -> TangentProbe:
    """Solve the stationarity condition in t near 1 for each tilt s and
    record the energy drop below the constant level.

    The curvature is the second derivative of the energy at the constant in
    the eigen direction; a negative value is the descent mechanism.
    """
    if samples < 3 or samples % 2 == 0:
        raise ParameterError("samples must be an odd integer >= 3")
    u0 = window.u_zero
    v = v2.function.values
    q = grid.weights
    fp_u0 = float(np.asarray(ft.fprime(np.array([u0])))[0])
    curvature = h1_form(grid, v, v) - fp_u0 * float(q @ (v * v))

    if eps1 is None:
        eps1 = 0.1 * u0
    vmax = float(np.max(np.abs(v)))
    eps1 = min(eps1, 0.9 * u0 / vmax)

    base = np.full_like(v, u0)
    I0 = energy_values(grid, ft, base)

    def sweep(width):
        s_values = np.linspace(-width, width, samples)
        g_values = np.full(samples, np.nan)
        gaps = np.full(samples, np.nan)
        failures = []
        for i, s in enumerate(s_values):
            w = base + s * v
            A = h1_form(grid, w, w)
            t = 1.0
            ok = False
            for _ in range(60):
                psi = t * A - float(q @ (w * np.asarray(ft.f(t * w))))
                dpsi = A - float(q @ (w * w * np.asarray(ft.fprime(t * w))))
                if dpsi == 0.0:
                    break
                t_new = t - psi / dpsi
                if abs(t_new - t) <= 1e-14 * max(1.0, abs(t)):
                    t = t_new
                    ok = True
                    break
                t = t_new
                if not (0.0 < t < 10.0):
                    break
            if not ok or abs(t - 1.0) >= eps2:
                failures.append(float(s))
                continue
            g_values[i] = t
            gaps[i] = energy_values(grid, ft, t * w) - I0
        return s_values, g_values, gaps, failures

    # second-order descent must beat the higher-order terms: shrink the
    # probe width until every off-center gap is negative
    for _ in range(12):
        s_values, g_values, gaps, failures = sweep(eps1)
        off = np.abs(s_values) > 0.0
        clean = not failures and np.all(np.isfinite(gaps))
        if curvature >= 0.0 or (clean and np.all(gaps[off] < 0.0)):
            break
        eps1 *= 0.5
    return TangentProbe(eps1=float(eps1), eps2=float(eps2), s_values=s_values,
                        g_values=g_values, gaps=gaps, curvature=float(curvature),
                        mechanism_present=curvature < 0.0, failures=tuple(failures))

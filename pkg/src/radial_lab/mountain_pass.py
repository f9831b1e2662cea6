"""Admissible endpoint sets, eigen-tilted initial path, constrained minimax
by repeated descent bursts with arclength reparametrization, and the
nonconstancy certificates of the resulting critical point.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .cone import ConeWindow, check_cone, project_to_window
from .errors import (BarrierError, InternalInvariantError, MechanismError,
                     ParameterError)
from .geometry import RadialFunction, RadialGrid, derivative_values
from .linear_operator import EigenPair, WeightSpec, h1_norm, symmetric_operator
from .reporting import CertificateSet
from .solver import newton_refine
from .variational import (FlowParams, energy_values, flow, gradient_values,
                          _weight_values)

#: minimax stops once the gradient at the path maximizer falls below this
GRAD_TARGET = 1e-6


@dataclass(frozen=True, eq=False)
class AdmissibleSets:
    """Endpoint neighborhoods of the two wells flanking the pass."""

    tau: float
    alpha: float
    branch: str  # "bounded" | "unbounded"
    window: ConeWindow
    ft: object
    grid: RadialGrid

    def _energy(self, u: RadialFunction) -> float:
        return energy_values(self.grid, self.ft, u.values)

    def _const_energy(self, c: float) -> float:
        return energy_values(self.grid, self.ft,
                             np.full(self.grid.intervals + 1, c))

    def in_U_minus(self, u: RadialFunction) -> bool:
        if not check_cone(u, self.window, tol=1e-12).in_window:
            return False
        gap = float(np.max(np.abs(u.values - self.window.u_minus)))
        return (gap < self.tau
                and self._energy(u) < self._const_energy(self.window.u_minus)
                + 0.5 * self.alpha)

    def in_U_plus(self, u: RadialFunction) -> bool:
        if not check_cone(u, self.window, tol=1e-12).in_window:
            return False
        if self.branch == "bounded":
            gap = float(np.max(np.abs(u.values - self.window.u_plus)))
            return (gap < self.tau
                    and self._energy(u) < self._const_energy(self.window.u_plus)
                    + 0.5 * self.alpha)
        return (bool(np.all(u.values >= self.window.u_zero - 1e-12))
                and self._energy(u) <= self._const_energy(self.window.u_minus))


@dataclass(eq=False)
class MPPath:
    """Discrete path in the window with strictly increasing parameters."""

    points: list
    params: np.ndarray
    window: ConeWindow
    sets: AdmissibleSets

    @property
    def target_points(self) -> int:
        return getattr(self, "_target_points", len(self.points))

    def __post_init__(self):
        object.__setattr__(self, "_target_points", len(self.points))


@dataclass(eq=False)
class MinimaxReport:
    level: float
    u_star: RadialFunction
    grad_norm: float
    residual_inf: float
    energies: np.ndarray
    rounds: int
    c_history: list
    certificates: CertificateSet = field(default_factory=CertificateSet)
    flags: list = field(default_factory=list)


def _segment_energy_drop(ft, lo: float, shift: float, sign: float,
                         ball: float) -> float:
    """1-D barrier integrand: |B| * shift * int_0^1 sign*(s - f(s)) dt along
    the constant segment from lo to lo + sign*shift."""
    t = np.linspace(0.0, 1.0, 2049)
    s = lo + sign * shift * t
    vals = sign * (s - np.asarray(ft.f(s)))
    return ball * shift * float(np.trapezoid(vals, t))


def admissible_sets(window: ConeWindow, ft, grid: RadialGrid) -> AdmissibleSets:
    """Pick the endpoint radius tau and the energy barrier estimate alpha."""
    if window.bounded:
        tau = 0.5 * min(window.u_zero - window.u_minus,
                        window.u_plus - window.u_zero)
        branch = "bounded"
    else:
        tau = 0.5 * (window.u_zero - window.u_minus)
        branch = "unbounded"
    ball = grid.ball_volume

    def const_energy(c):
        return energy_values(grid, ft, np.full(grid.intervals + 1, c))

    lower_direct = const_energy(window.u_minus + tau) - const_energy(window.u_minus)
    lower_1d = _segment_energy_drop(ft, window.u_minus, tau, +1.0, ball)
    candidates = [lower_direct, lower_1d]
    if branch == "bounded":
        upper_direct = const_energy(window.u_plus - tau) - const_energy(window.u_plus)
        upper_1d = _segment_energy_drop(ft, window.u_plus, tau, -1.0, ball)
        candidates += [upper_direct, upper_1d]
    alpha = min(candidates)
    if alpha <= 0.0:
        raise BarrierError(f"energy barrier estimate is not positive ({alpha:.3e})")
    alpha = max(alpha, 1e-8)
    return AdmissibleSets(tau=tau, alpha=alpha, branch=branch, window=window,
                          ft=ft, grid=grid)


def _find_endpoint_constant(sets: AdmissibleSets, side: str) -> float:
    """Constant admissible endpoint: half-tau shift into the well, halved
    until the energy condition of the endpoint set holds."""
    w = sets.window
    if side == "minus":
        shift = 0.5 * sets.tau
        while shift > 1e-12 * max(1.0, w.u_zero):
            c = w.u_minus + shift
            if sets.in_U_minus(RadialFunction(
                    sets.grid, np.full(sets.grid.intervals + 1, c))):
                return c
            shift *= 0.5
        raise BarrierError("no admissible constant near u_minus")
    if sets.branch == "bounded":
        shift = 0.5 * sets.tau
        while shift > 1e-12 * max(1.0, w.u_plus):
            c = w.u_plus - shift
            if sets.in_U_plus(RadialFunction(
                    sets.grid, np.full(sets.grid.intervals + 1, c))):
                return c
            shift *= 0.5
        raise BarrierError("no admissible constant near u_plus")
    # unbounded branch: grow until the energy falls below the left well;
    # guaranteed since the energy of constants diverges to -infinity
    cap = 10.0 * sets.ft.s0
    c = 1.2 * w.u_zero
    while c <= cap:
        if sets.in_U_plus(RadialFunction(
                sets.grid, np.full(sets.grid.intervals + 1, c))):
            return c
        c *= 1.25
    raise BarrierError(f"no admissible constant endpoint below 10 s0 = {cap:g}")


def initial_path(window: ConeWindow, v2: EigenPair, sets: AdmissibleSets,
                 P: int = 33) -> MPPath:
    """Tilted segment of near-constants t (u0 + s v), with s halved until the
    endpoints are admissible and the path maximum drops below the constant
    level; s underflow means the descent mechanism is too weak.
    """
    if P < 17 or P % 2 == 0:
        raise ParameterError("P must be an odd integer >= 17")
    grid, ft = sets.grid, sets.ft
    u0 = window.u_zero
    v = v2.function.values
    I_u0 = energy_values(grid, ft, np.full(grid.intervals + 1, u0))
    t_minus = _find_endpoint_constant(sets, "minus") / u0
    t_plus = _find_endpoint_constant(sets, "plus") / u0
    ts = np.linspace(t_minus, t_plus, P)

    s = 0.1
    best_excess = math.inf
    while s >= 1e-6:
        pts = []
        for t in ts:
            vals = t * (u0 + s * v)
            pts.append(project_to_window(RadialFunction(grid, vals), window))
        energies = [energy_values(grid, ft, p.values) for p in pts]
        max_I = max(energies)
        ok = (sets.in_U_minus(pts[0]) and sets.in_U_plus(pts[-1])
              and max_I < I_u0 - 1e-12)
        if ok:
            params = (ts - t_minus) / (t_plus - t_minus)
            return MPPath(points=pts, params=params, window=window, sets=sets)
        best_excess = min(best_excess, max_I - I_u0)
        s *= 0.5
    raise MechanismError(
        "no tilt below 0.1 pushes the path maximum under the constant level",
        diagnostics={"best_excess": best_excess, "t_minus": t_minus,
                     "t_plus": t_plus, "level": I_u0})


def _segment_max(grid, ft, av, va, vb, coarse: int = 9, refine: int = 24):
    """Maximize the energy over the convex segment between two path points.

    Coarse scan plus golden-section refinement around the best sample;
    returns (weight, energy)."""
    ws = np.linspace(0.0, 1.0, coarse)
    Es = [energy_values(grid, ft, (1.0 - w) * va + w * vb, av) for w in ws]
    k = int(np.argmax(Es))
    lo = ws[max(k - 1, 0)]
    hi = ws[min(k + 1, coarse - 1)]
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1 = energy_values(grid, ft, (1.0 - x1) * va + x1 * vb, av)
    f2 = energy_values(grid, ft, (1.0 - x2) * va + x2 * vb, av)
    for _ in range(refine):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = energy_values(grid, ft, (1.0 - x2) * va + x2 * vb, av)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = energy_values(grid, ft, (1.0 - x1) * va + x1 * vb, av)
    w = 0.5 * (lo + hi)
    return w, energy_values(grid, ft, (1.0 - w) * va + w * vb, av)


def _locate_ridge(path: MPPath, ft, av):
    """Global maximizer of the energy over the whole polygonal path.

    Coarse scan of every segment, golden refinement only near the top.
    Returns (values, energy, node_index_if_at_node)."""
    grid = path.sets.grid
    vals = [p.values for p in path.points]
    best_E = -math.inf
    best_vals = None
    best_node = None
    for j, v in enumerate(vals):
        E = energy_values(grid, ft, v, av)
        if E > best_E:
            best_E, best_vals, best_node = E, v, j
    coarse = []
    for k in range(len(vals) - 1):
        ws = np.linspace(0.0, 1.0, 7)[1:-1]
        Es = [energy_values(grid, ft, (1.0 - w) * vals[k] + w * vals[k + 1], av)
              for w in ws]
        coarse.append(max(Es))
    cutoff = max(best_E, max(coarse)) - 1e-12
    top = np.argsort(coarse)[-3:]
    for k in top:
        if coarse[k] < cutoff - 0.1 * abs(cutoff):
            continue
        w, E = _segment_max(grid, ft, av, vals[k], vals[k + 1])
        if E > best_E and 1e-9 < w < 1.0 - 1e-9:
            best_E = E
            best_vals = (1.0 - w) * vals[k] + w * vals[k + 1]
            best_node = None
    return best_vals, best_E, best_node


def _respace(path: MPPath, keep: np.ndarray | None = None) -> None:
    """Insert/merge points so neighbor H1 distances stay within [d/2, 2d]
    of the nominal spacing; endpoints and the optional kept point survive."""
    grid = path.sets.grid
    P_target = path.target_points
    pts = list(path.points)
    if keep is not None:
        # insert the kept point at its place along the path (closest segment)
        dists = [h1_norm(grid, keep - p.values) for p in pts]
        j = int(np.argmin(dists))
        candidates = []
        if j > 0:
            candidates.append(j)
        if j < len(pts) - 1:
            candidates.append(j + 1)
        pos = min(candidates, key=lambda i: h1_norm(
            grid, 0.5 * (pts[i - 1].values + pts[i].values) - keep))
        pts.insert(pos, project_to_window(RadialFunction(grid, keep), path.window))
        keep_idx = pos
    else:
        keep_idx = -1

    seg = [h1_norm(grid, pts[j + 1].values - pts[j].values)
           for j in range(len(pts) - 1)]
    total = sum(seg)
    if total <= 0.0:
        return
    d = total / (P_target - 1)

    # split long segments with projected convex midpoints
    out = [pts[0]]
    for j in range(len(pts) - 1):
        if seg[j] > 2.0 * d:
            k = int(math.ceil(seg[j] / d))
            for m in range(1, k):
                mix = pts[j].values + (m / k) * (pts[j + 1].values - pts[j].values)
                out.append(project_to_window(RadialFunction(grid, mix), path.window))
        out.append(pts[j + 1])
        if j + 1 == keep_idx:
            keep_idx = len(out) - 1

    # merge nodes closer than d/2 to their predecessor
    merged = [out[0]]
    for j in range(1, len(out) - 1):
        if j == keep_idx:
            merged.append(out[j])
            continue
        if h1_norm(path.sets.grid, out[j].values - merged[-1].values) >= 0.5 * d:
            merged.append(out[j])
    merged.append(out[-1])

    path.points = merged
    path.params = np.linspace(0.0, 1.0, len(merged))


def minimax(path: MPPath, ft, a: WeightSpec | None, flow_params: FlowParams,
            max_rounds: int = 400) -> MinimaxReport:
    """Lower the path by short descent bursts until its maximizer is nearly
    critical, then polish that point with Newton.

    Rounds flow every interior point (projection on), re-spread the points
    uniformly in H1 arclength, and track the running level c = max I; flow
    only ever lowers point energies, so c is nonincreasing.
    """
    sets = path.sets
    grid = sets.grid
    window = path.window
    av = _weight_values(grid, a)
    burst = FlowParams(level=None, epsilon=flow_params.epsilon,
                       delta_grad=flow_params.delta_grad, step=flow_params.step,
                       max_duration=flow_params.max_duration
                       or 5.0 * flow_params.step,
                       projection_mode=True)
    u0_const = np.full(grid.intervals + 1, window.u_zero)
    I_u0 = energy_values(grid, ft, u0_const)

    c_history = []
    flags = []
    ridge_vals = path.points[int(np.argmax(
        [energy_values(grid, ft, p.values, av) for p in path.points]))].values
    # nodes that sit on the window constraint or at a well bottom never move
    # again; skipping them keeps rounds cheap
    settled: set = set()
    for round_id in range(1, max_rounds + 1):
        for j in range(1, len(path.points) - 1):
            pt = path.points[j]
            if id(pt) in settled:
                continue
            res = flow(pt, ft, a, burst, window)
            if res.reason in ("pinned by the window constraint",
                              "gradient below threshold"):
                settled.add(id(res.u))
            path.points[j] = res.u
        # the path maximum usually hides inside a segment: locate it there
        # and make it a node, so the stopping test sees the actual ridge
        ridge_vals, c_round, at_node = _locate_ridge(path, ft, av)
        c_history.append(c_round)
        if not (sets.in_U_minus(path.points[0]) and sets.in_U_plus(path.points[-1])):
            raise InternalInvariantError(
                "a path endpoint left its admissible set during the minimax")
        grad_at_max = h1_norm(grid, gradient_values(grid, ft, ridge_vals, av))
        if grad_at_max < GRAD_TARGET:
            break
        # a settled level is the other normal exit: the located ridge point
        # is then handed to Newton, which supplies the tight residual
        if len(c_history) >= 15 and abs(c_history[-15] - c_round) \
                <= 1e-9 * (1.0 + abs(c_round)):
            break
        _respace(path, keep=None if at_node is not None else ridge_vals)
    rounds = len(c_history)
    energies = np.array([energy_values(grid, ft, p.values, av)
                         for p in path.points])
    c = c_history[-1] if c_history else float(np.max(energies))

    if c >= I_u0 - 1e-8:
        flags.append("degenerate path, no descent below I(u0)")

    op = symmetric_operator(grid)
    u_vals, rinf, _, newton_ok = newton_refine(
        op, av, ft, ridge_vals, tol=1e-9, max_iter=80)
    if not newton_ok:
        flags.append("newton polish did not converge")
        u_vals, rinf = ridge_vals, math.inf
    u_star = RadialFunction(grid, u_vals)

    certs = CertificateSet()
    certs.upper("residual", rinf, 1e-8)
    rep = check_cone(u_star, window, tol=1e-10)
    certs.add("window_membership",
              max(0.0, -rep.min_value, rep.max_monotonicity_violation), 1e-10,
              bool(rep.in_window))
    if sets.branch == "bounded":
        floorplus = energy_values(grid, ft, np.full(grid.intervals + 1,
                                                    window.u_plus))
        floorminus = energy_values(grid, ft, np.full(grid.intervals + 1,
                                                     window.u_minus))
        certs.lower("level_above_barrier", c,
                    max(floorminus, floorplus) + sets.alpha * (1.0 - 1e-6))
    else:
        floorminus = energy_values(grid, ft, np.full(grid.intervals + 1,
                                                     window.u_minus))
        certs.lower("level_above_barrier", c, floorminus + sets.alpha)

    grad_star = h1_norm(grid, gradient_values(grid, ft, u_star.values, av))
    return MinimaxReport(level=c, u_star=u_star, grad_norm=grad_star,
                         residual_inf=rinf, energies=energies, rounds=rounds,
                         c_history=c_history, certificates=certs, flags=flags)


def certify_nonconstant(u_star: RadialFunction, window: ConeWindow,
                        ft) -> CertificateSet:
    """The five nonconstancy certificates of the critical point."""
    grid = u_star.grid
    certs = CertificateSet()
    I_star = energy_values(grid, ft, u_star.values)
    I_u0 = energy_values(grid, ft, np.full(grid.intervals + 1, window.u_zero))
    certs.add("below_constant_level", I_star, I_u0 - 1e-8,
              I_star < I_u0 - 1e-8)
    dist = float(np.max(np.abs(u_star.values - window.u_zero)))
    certs.lower("distance_from_constant", dist, 1e-4)
    osc = float(u_star.values[-1] - u_star.values[0])
    certs.lower("oscillation", osc, 1e-4)
    diff = u_star.values - window.u_zero
    signs = np.sign(diff[np.abs(diff) > 0.0])
    crossings = int(np.sum(signs[1:] != signs[:-1])) if signs.size else 0
    certs.lower("intersections_with_constant", crossings, 1)
    slopes = derivative_values(grid, u_star.values)[1:-1]
    certs.add("nondecreasing", float(np.min(slopes)), 0.0,
              bool(np.min(slopes) >= -1e-10),
              note="minimum interior slope")
    return certs

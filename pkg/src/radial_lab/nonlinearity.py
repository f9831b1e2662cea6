"""Nonlinearities: structural validation, fixed points, truncation at infinity
and the explicit a priori constant chain used by the solution certificates.

All families are vectorized callables on numpy arrays, extended by zero on
the negative axis.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .cone import ConeWindow
from .errors import ParameterError, ValidationError
from .geometry import RadialGrid
from .reporting import CertificateSet

#: fixed-point residual tolerance for windows
FIXED_POINT_TOL = 1e-9

#: default growth witness delta; halved until admissible
DELTA_DEFAULT = 0.5


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """A nonlinearity f with derivative and antiderivative (F(0) = 0)."""

    f: object
    fprime: object
    F: object
    family: str = "custom"
    params: tuple = ()

    def describe(self) -> str:
        if self.params:
            return f"{self.family}:" + ",".join(f"{p:g}" for p in self.params)
        return self.family


def _zero_extend(fn):
    def wrapped(s):
        s = np.asarray(s, dtype=np.float64)
        pos = s > 0.0
        out = np.zeros_like(s)
        if np.any(pos):
            out[pos] = fn(s[pos])
        return out

    return wrapped


def power_family(p: float) -> NonlinearitySpec:
    """f(s) = s^p, p > 1."""
    if p <= 1.0:
        raise ParameterError(f"power family needs p > 1, got {p}")
    return NonlinearitySpec(
        f=_zero_extend(lambda s: s**p),
        fprime=_zero_extend(lambda s: p * s ** (p - 1.0)),
        F=_zero_extend(lambda s: s ** (p + 1.0) / (p + 1.0)),
        family="power",
        params=(float(p),),
    )


def saturating_family(lambda_star: float) -> NonlinearitySpec:
    """f(s) = g(s) s with g(s) = lambda_star s^2/(1+s^2), strictly increasing."""
    if lambda_star <= 1.0:
        raise ParameterError(f"saturating family needs lambda_star > 1, got {lambda_star}")
    lam = float(lambda_star)
    return NonlinearitySpec(
        f=_zero_extend(lambda s: lam * s**3 / (1.0 + s * s)),
        fprime=_zero_extend(lambda s: lam * (s**4 + 3.0 * s * s) / (1.0 + s * s) ** 2),
        F=_zero_extend(lambda s: 0.5 * lam * (s * s - np.log1p(s * s))),
        family="saturating",
        params=(lam,),
    )


class _HermiteSpline:
    """C1 cubic Hermite spline with a quadratic tail, in power basis.

    Per-segment coefficients and cumulative integrals are precomputed once,
    so evaluation is a searchsorted plus a Horner pass.
    """

    __slots__ = ("knots", "a", "b", "c", "d", "cum", "y_last", "m_last", "tail")

    def __init__(self, knots, values, slopes, tail):
        k = np.asarray(knots, dtype=np.float64)
        y = np.asarray(values, dtype=np.float64)
        m = np.asarray(slopes, dtype=np.float64)
        h = np.diff(k)
        delta = np.diff(y) / h
        self.knots = k
        self.a = y[:-1]
        self.b = m[:-1]
        self.c = (3.0 * delta - 2.0 * m[:-1] - m[1:]) / h
        self.d = (m[:-1] + m[1:] - 2.0 * delta) / (h * h)
        seg = h * (self.a + h * (self.b / 2.0 + h * (self.c / 3.0 + h * self.d / 4.0)))
        self.cum = np.concatenate(([0.0], np.cumsum(seg)))
        self.y_last = float(y[-1])
        self.m_last = float(m[-1])
        self.tail = float(tail)

    def _eval(self, s, order):
        s = np.asarray(s, dtype=np.float64)
        out = np.zeros(s.shape)
        k = self.knots
        inside = (s > 0.0) & (s <= k[-1])
        if inside.any():
            si = s[inside]
            j = np.searchsorted(k, si, side="right") - 1
            np.clip(j, 0, len(k) - 2, out=j)
            dt = si - k[j]
            if order == 0:
                out[inside] = self.a[j] + dt * (self.b[j] + dt * (self.c[j] + dt * self.d[j]))
            elif order == 1:
                out[inside] = self.b[j] + dt * (2.0 * self.c[j] + 3.0 * dt * self.d[j])
            else:
                out[inside] = self.cum[j] + dt * (self.a[j] + dt * (
                    self.b[j] / 2.0 + dt * (self.c[j] / 3.0 + dt * self.d[j] / 4.0)))
        beyond = s > k[-1]
        if beyond.any():
            dt = s[beyond] - k[-1]
            if order == 0:
                out[beyond] = self.y_last + dt * (self.m_last + self.tail * dt)
            elif order == 1:
                out[beyond] = self.m_last + 2.0 * self.tail * dt
            else:
                out[beyond] = self.cum[-1] + dt * (self.y_last + dt * (
                    self.m_last / 2.0 + self.tail * dt / 3.0))
        return out

    def f(self, s):
        return self._eval(s, 0)

    def fprime(self, s):
        return self._eval(s, 1)

    def F(self, s):
        return self._eval(s, 2)


def spline_family(knots, values, slopes, tail: float = 0.0,
                  label: str = "spline") -> NonlinearitySpec:
    """Monotone C1 Hermite spline through (knots, values, slopes) with a
    quadratic tail f(s) = v_last + m_last (s - k_last) + tail (s - k_last)^2.
    """
    knots = np.asarray(knots, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    slopes = np.asarray(slopes, dtype=np.float64)
    if knots[0] != 0.0 or values[0] != 0.0:
        raise ParameterError("spline must start at f(0) = 0")
    if np.any(np.diff(knots) <= 0.0):
        raise ParameterError("spline knots must be strictly increasing")
    if np.any(slopes < 0.0) or tail < 0.0:
        raise ParameterError("spline slopes and tail must be nonnegative")
    spline = _HermiteSpline(knots, values, slopes, tail)
    return NonlinearitySpec(
        f=spline.f,
        fprime=spline.fprime,
        F=spline.F,
        family=label,
        params=tuple(knots) + tuple(values) + tuple(slopes) + (float(tail),),
    )


#: knot table of the built-in three-fixed-point spline: tangent to the
#: diagonal at 1 and 3, steep crossing at 2 (slope 20); the interior knots
#: keep every Hermite piece monotone (slopes within three times the secant).
THREE_CROSSING_TABLE = {
    "knots": (0.0, 1.0, 1.3, 1.9, 2.0, 2.1, 2.7, 3.0),
    "values": (0.0, 1.0, 1.15, 1.2, 2.0, 2.8, 2.9, 3.0),
    "slopes": (0.0, 1.0, 0.1, 0.2, 20.0, 0.5, 0.3, 1.0),
    "tail": 2.0,
}


def three_crossing_family() -> NonlinearitySpec:
    """Built-in spline with fixed points 1 (tangent), 2 (steep), 3 (tangent)."""
    t = THREE_CROSSING_TABLE
    return spline_family(t["knots"], t["values"], t["slopes"], t["tail"],
                         label="three-crossing")


def custom_spec(f, fprime, F=None, family: str = "custom") -> NonlinearitySpec:
    """Wrap user callables; the antiderivative defaults to adaptive quadrature."""
    if F is None:
        scalar_f = lambda t: float(np.asarray(f(np.array([t])))[0])

        def F(s):
            s = np.asarray(s, dtype=np.float64)
            flat = s.ravel()
            out = np.array([quad(scalar_f, 0.0, t, limit=200)[0] if t > 0 else 0.0
                            for t in flat])
            return out.reshape(s.shape)

    return NonlinearitySpec(f=f, fprime=fprime, F=F, family=family)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple
    m_witness: float | None
    delta_witness: float | None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate(spec: NonlinearitySpec, a0: float = 1.0) -> AssumptionReport:
    """Check the structural hypotheses on f and search growth witnesses.

    The superlinearity witness is the smallest point M of a geometric sample
    grid such that a0 f(s)/s >= 1 + delta for every sampled s >= M, with
    delta starting at 0.5 and halving until admissible.
    """
    checks = []
    f, fp = spec.f, spec.fprime

    f0 = float(np.asarray(f(np.array([0.0])))[0])
    r_small = float(np.asarray(f(np.array([1e-6])))[0]) / 1e-6
    ok1 = abs(f0) <= 1e-12 and abs(r_small) <= 1e-3
    checks.append(HypothesisCheck(
        "f1", ok1, f"f(0) = {f0:.3e}, f(s)/s = {r_small:.3e} at s = 1e-6"))

    s_mono = np.unique(np.concatenate([np.linspace(0.0, 10.0, 2001),
                                       np.geomspace(1e-3, 1e4, 2001)]))
    fv = np.asarray(f(s_mono))
    drops = fv[:-1] - fv[1:]
    j = int(np.argmax(drops))
    scale = 1.0 + float(np.max(np.abs(fv[np.isfinite(fv)])))
    ok2 = bool(np.all(np.isfinite(fv))) and drops[j] <= 1e-12 * scale
    checks.append(HypothesisCheck(
        "f2", ok2, f"max decrease {drops[j]:.3e} near s = {s_mono[j]:.4g}"))

    gs = np.geomspace(1e-3, 1e4, 1621)
    ratio = a0 * np.asarray(f(gs)) / gs
    suffix_min = np.minimum.accumulate(ratio[::-1])[::-1]
    m_wit = None
    d_wit = None
    delta = DELTA_DEFAULT
    while delta >= 1e-3:
        idx = np.nonzero(suffix_min >= 1.0 + delta)[0]
        if idx.size:
            m_wit = float(gs[idx[0]])
            d_wit = delta
            break
        delta *= 0.5
    checks.append(HypothesisCheck(
        "f3", m_wit is not None,
        f"witness (M, delta) = ({m_wit}, {d_wit})" if m_wit is not None
        else "no admissible (M, delta) found"))

    s_d = np.geomspace(1e-3, 10.0, 200)
    hs = 1e-6 * np.maximum(1.0, s_d)
    fd = (np.asarray(f(s_d + hs)) - np.asarray(f(s_d - hs))) / (2.0 * hs)
    fpv = np.asarray(fp(s_d))
    rel = np.max(np.abs(fd - fpv) / (1.0 + np.abs(fpv)))
    checks.append(HypothesisCheck(
        "fprime", rel <= 1e-5, f"max relative gap to finite differences {rel:.3e}"))

    return AssumptionReport(checks=tuple(checks), m_witness=m_wit, delta_witness=d_wit)


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedPoint:
    s: float
    fprime: float
    kind: str  # "crossing_up" | "crossing_down" | "tangent"


@dataclass(frozen=True)
class FixedPointScan:
    roots: tuple
    window: ConeWindow | None
    f4_ok: bool
    detail: str


def _bisect_root(g, lo, hi):
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm > 0.0) == (glo > 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def fixed_points(spec: NonlinearitySpec, s_max: float, tol: float = FIXED_POINT_TOL,
                 lambda2_rad: float | None = None,
                 target_u0: float | None = None) -> FixedPointScan:
    """Locate fixed points of f on (0, s_max] and assemble the order window.

    Scans 10^4 samples of s - f(s), bisects sign changes, classifies
    tangencies, and (given lambda2_rad) selects an unstable fixed point u0
    with f'(u0) > lambda2_rad; u_plus is +inf when f stays above the diagonal
    up to s_max.
    """
    g = lambda s: s - float(np.asarray(spec.f(np.array([s])))[0])
    ss = np.linspace(0.0, s_max, 10001)
    gv = ss - np.asarray(spec.f(ss))
    scale = 1.0 + float(np.max(np.abs(gv)))
    roots: list[FixedPoint] = []

    def fprime_at(s):
        return float(np.asarray(spec.fprime(np.array([s])))[0])

    def add_root(s, kind):
        for r in roots:
            if abs(r.s - s) <= 1e-7 * max(1.0, s_max):
                return
        roots.append(FixedPoint(s=s, fprime=fprime_at(s), kind=kind))

    for j in range(1, len(ss) - 1):
        if gv[j] == 0.0 and ss[j] > 0.0:
            left, right = gv[j - 1], gv[j + 1]
            kind = ("crossing_up" if left > 0.0 > right
                    else "crossing_down" if left < 0.0 < right else "tangent")
            add_root(float(ss[j]), kind)
        elif gv[j] * gv[j + 1] < 0.0:
            s_star = _bisect_root(g, float(ss[j]), float(ss[j + 1]))
            add_root(s_star, "crossing_up" if gv[j] > 0.0 else "crossing_down")

    # tangencies: interior local minima of |g| that nearly touch zero
    absg = np.abs(gv)
    for j in range(1, len(ss) - 1):
        if ss[j] <= 0.0 or absg[j] > tol * scale:
            continue
        if absg[j] <= absg[j - 1] and absg[j] <= absg[j + 1] and gv[j - 1] * gv[j + 1] > 0.0:
            add_root(float(ss[j]), "tangent")

    roots.sort(key=lambda r: r.s)

    window = None
    f4_ok = False
    detail = "lambda2_rad not supplied; no (f4) selection attempted"
    if lambda2_rad is not None:
        candidates = [r for r in roots if r.kind == "crossing_up" and r.fprime > lambda2_rad]
        if target_u0 is not None:
            candidates = sorted(candidates, key=lambda r: abs(r.s - target_u0))
        if not candidates:
            detail = (f"(f4) fails: no upward crossing with f' > {lambda2_rad:.6g} "
                      f"among {[round(r.s, 6) for r in roots]}")
        else:
            u0 = candidates[0].s
            below = [r.s for r in roots if r.s < u0 - 1e-7]
            u_minus = max(below) if below else 0.0
            above = [r.s for r in roots if r.s > u0 + 1e-7]
            if above:
                u_plus = min(above)
            else:
                tail = gv[ss > u0 + 1e-6]
                if np.all(tail < 0.0):
                    u_plus = math.inf
                else:
                    u_plus = math.nan
            if math.isnan(u_plus):
                detail = "f returns below the diagonal after u0 without a fixed point"
            else:
                window = ConeWindow(u_minus=u_minus, u_zero=u0, u_plus=u_plus, source=spec)
                _check_window(spec, window, tol)
                f4_ok = True
                detail = f"window ({u_minus:.6g}, {u0:.6g}, {u_plus:.6g})"

    return FixedPointScan(roots=tuple(roots), window=window, f4_ok=f4_ok, detail=detail)


def _check_window(spec: NonlinearitySpec, window: ConeWindow, tol: float) -> None:
    """Window invariants: fixed-point residuals and diagonal sign pattern."""
    pts = [window.u_minus, window.u_zero]
    if window.bounded:
        pts.append(window.u_plus)
    fv = np.asarray(spec.f(np.array(pts)))
    for s, val in zip(pts, fv):
        if abs(val - s) > FIXED_POINT_TOL * (1.0 + abs(s)):
            raise ValidationError(f"window point {s:.8g} is not a fixed point "
                                  f"(|f(s)-s| = {abs(val - s):.3e})")
    span = window.u_zero - window.u_minus
    s_lo = np.linspace(window.u_minus + 0.02 * span, window.u_zero - 0.02 * span, 64)
    if np.any(s_lo - np.asarray(spec.f(s_lo)) <= 0.0):
        raise ValidationError("s - f(s) must be positive between u_minus and u_zero")
    hi = min(window.u_plus, window.u_zero + 10.0)
    span = hi - window.u_zero
    s_hi = np.linspace(window.u_zero + 0.02 * span, hi - 0.02 * span, 64)
    if np.any(s_hi - np.asarray(spec.f(s_hi)) >= 0.0):
        raise ValidationError("s - f(s) must be negative between u_zero and u_plus")


# ---------------------------------------------------------------------------
# truncation and the constant chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AprioriBounds:
    """Explicit admissible constants bounding all cone solutions."""

    lambda_bar: float
    K1: float
    K_inf: float
    K2: float
    k2: float
    embed_C: float
    M: float
    delta: float
    sigma: float

    def __post_init__(self):
        vals = [self.K1, self.K_inf, self.K2, self.k2, self.embed_C]
        if not all(math.isfinite(v) and v > 0.0 for v in vals):
            raise ValidationError(f"constant chain must be positive and finite: {self}")
        if not (math.isfinite(self.lambda_bar) and self.lambda_bar >= 0.0):
            raise ValidationError(f"lambda_bar must be finite and >= 0: {self.lambda_bar}")
        if self.K_inf < self.M:
            raise ValidationError("K_inf must dominate the growth witness M")


@dataclass(frozen=True, eq=False)
class TruncatedNonlinearity:
    """f modified beyond s0 to grow like s^p, agreeing with f on [0, s0]."""

    base: NonlinearitySpec
    s0: float
    p: float
    case: int                # 1: tangency at s0, 2: C1 patch on (s0, s0+eps)
    slope: float             # asymptotic linear slope (1 + delta)/a0
    s1: float                # patch end (= s0 in case 1)
    patch: tuple             # Hermite data (value/slope at s0 and s1) in case 2
    f1: float                # value at s1
    F_s1: float              # antiderivative at s1
    F_s0: float              # antiderivative at s0

    def _regions(self, s):
        s = np.asarray(s, dtype=np.float64)
        below = s <= self.s0
        mid = (s > self.s0) & (s <= self.s1)
        above = s > self.s1
        return s, below, mid, above

    def _patch_eval(self, s, order):
        y0, m0, y1, m1 = self.patch
        h = self.s1 - self.s0
        t = (s - self.s0) / h
        if order == 0:
            h00 = (1.0 + 2.0 * t) * (1.0 - t) ** 2
            h10 = t * (1.0 - t) ** 2
            h01 = t * t * (3.0 - 2.0 * t)
            h11 = t * t * (t - 1.0)
            return h00 * y0 + h * h10 * m0 + h01 * y1 + h * h11 * m1
        if order == 1:
            return (6.0 * t * (t - 1.0) * (y0 - y1) / h
                    + (3.0 * t * t - 4.0 * t + 1.0) * m0
                    + (3.0 * t * t - 2.0 * t) * m1)
        H00 = t * (1.0 + t * t * (0.5 * t - 1.0))
        H10 = t * t * (0.5 + t * (0.25 * t - 2.0 / 3.0))
        H01 = t**3 * (1.0 - 0.5 * t)
        H11 = t**3 * (0.25 * t - 1.0 / 3.0)
        return h * (H00 * y0 + h * H10 * m0 + H01 * y1 + h * H11 * m1)

    def f(self, s):
        s, below, mid, above = self._regions(s)
        out = np.zeros_like(s)
        out[below] = np.asarray(self.base.f(s[below]))
        if np.any(mid):
            out[mid] = self._patch_eval(s[mid], 0)
        if np.any(above):
            d = s[above] - self.s1
            out[above] = self.f1 + self.slope * d + d**self.p
        return out

    def fprime(self, s):
        s, below, mid, above = self._regions(s)
        out = np.zeros_like(s)
        out[below] = np.asarray(self.base.fprime(s[below]))
        if np.any(mid):
            out[mid] = self._patch_eval(s[mid], 1)
        if np.any(above):
            d = s[above] - self.s1
            out[above] = self.slope + self.p * d ** (self.p - 1.0)
        return out

    def F(self, s):
        s, below, mid, above = self._regions(s)
        out = np.zeros_like(s)
        out[below] = np.asarray(self.base.F(s[below]))
        if np.any(mid):
            out[mid] = self.F_s0 + self._patch_eval(s[mid], 2)
        if np.any(above):
            d = s[above] - self.s1
            out[above] = (self.F_s1 + self.f1 * d + 0.5 * self.slope * d * d
                          + d ** (self.p + 1.0) / (self.p + 1.0))
        return out

    def asymptotic_sample_point(self) -> float:
        """A point where f(s)/s^p is within 1% of 1.

        The affine part of the extension carries the (possibly huge) value
        f(s1), so the pure power only dominates past f(s1)^(1/p); for mild
        bases this reduces to the ordinary 1e3 * s0 scale.
        """
        return max(1e3 * self.s0, 1e3 * self.f1 ** (1.0 / self.p),
                   100.0 * self.p * self.s1)


def lambda_bar_of(spec: NonlinearitySpec, hi: float) -> float:
    """Smallest s such that f(t) >= t for every sampled t >= s."""
    ss = np.linspace(0.0, hi, 20001)
    gv = ss - np.asarray(spec.f(ss))
    above = np.nonzero(gv > 0.0)[0]
    if above.size == 0:
        return 0.0
    j = int(above[-1])
    if j >= len(ss) - 1:
        raise ValidationError(f"f stays below the diagonal up to s = {hi:g}; "
                              "no finite threshold found")
    g = lambda s: s - float(np.asarray(spec.f(np.array([s])))[0])
    return _bisect_root(g, float(ss[j]), float(ss[j + 1]))


def _sigma_of(spec: NonlinearitySpec, a1: float) -> float:
    """Largest s with f(t) <= t/(2 a(1)) for all t <= s (exists by f'(0)=0)."""
    ss = np.geomspace(1e-9, 1e4, 4001)
    gv = np.asarray(spec.f(ss)) - ss / (2.0 * a1)
    bad = np.nonzero(gv > 0.0)[0]
    if bad.size == 0:
        return float(ss[-1])
    j = int(bad[0])
    if j == 0:
        raise ValidationError("f exceeds s/(2 a(1)) arbitrarily close to 0")
    g = lambda s: float(np.asarray(spec.f(np.array([s])))[0]) - s / (2.0 * a1)
    return _bisect_root(g, float(ss[j - 1]), float(ss[j]))


def compute_bounds(spec: NonlinearitySpec, grid: RadialGrid,
                   report: AssumptionReport, a0: float = 1.0, a1: float = 1.0,
                   sup_b: float = 0.0) -> AprioriBounds:
    """Evaluate the explicit constant chain for the given weight/drift data."""
    if report.m_witness is None:
        raise ValidationError("growth witnesses unavailable; (f3) validation failed")
    M, delta = report.m_witness, report.delta_witness
    N = grid.dimension
    ball = grid.ball_volume
    omega = grid.sphere_area
    lam_bar = lambda_bar_of(spec, hi=1e3 * max(1.0, M))
    K1 = M * ball * (1.0 + 1.0 / delta)
    embed_C = 2.0**N / omega
    K_inf = embed_C * 2.0 * K1
    f_at = float(np.asarray(spec.f(np.array([K_inf])))[0])
    K2 = math.sqrt(a1 * f_at * K_inf * ball + sup_b * K1 * K_inf + lam_bar * K1)
    sigma = _sigma_of(spec, a1)
    k2 = sigma / (embed_C * math.sqrt(2.0 * ball))
    return AprioriBounds(lambda_bar=lam_bar, K1=K1, K_inf=K_inf, K2=K2, k2=k2,
                         embed_C=embed_C, M=M, delta=delta, sigma=sigma)


def truncate(spec: NonlinearitySpec, grid: RadialGrid,
             report: AssumptionReport | None = None, a0: float = 1.0,
             a1: float = 1.0, sup_b: float = 0.0, s0: float | None = None,
             p: float | None = None) -> tuple[TruncatedNonlinearity, AprioriBounds]:
    """Build the subcritical-at-infinity modification of f.

    Beyond s0 (default 1.5 max(K_inf, M), always above every cone solution)
    f is continued as tangent-line-plus-power. If f strictly dominates the
    line (1+delta)/a0 s at s0, a cubic C1 patch on (s0, s0 + 0.1 s0) first
    brings the slope down to the line's.
    """
    if report is None:
        report = validate(spec, a0)
    if not report.passed:
        bad = [c.name for c in report.checks if not c.passed]
        raise ValidationError(f"hypotheses {bad} failed; cannot truncate")
    bounds = compute_bounds(spec, grid, report, a0=a0, a1=a1, sup_b=sup_b)
    floor = max(bounds.K_inf, bounds.M)
    if s0 is None:
        s0 = 1.5 * floor
    elif s0 <= floor:
        raise ParameterError(f"s0 must exceed max(K_inf, M) = {floor:.6g}")
    N = grid.dimension
    if p is None:
        p = 3.0
    if N >= 3:
        p = min(p, (N + 2.0) / (N - 2.0) - 0.1)
    if p <= 1.0:
        raise ParameterError(f"truncation exponent must exceed 1, got {p}")

    slope = (1.0 + report.delta_witness) / a0
    f_s0 = float(np.asarray(spec.f(np.array([s0])))[0])
    fp_s0 = float(np.asarray(spec.fprime(np.array([s0])))[0])
    line = slope * s0
    if f_s0 < line * (1.0 - 1e-9):
        raise ValidationError(f"f(s0) = {f_s0:.6g} sits below the witness line {line:.6g}")

    F_s0 = float(np.asarray(spec.F(np.array([s0])))[0])
    if abs(f_s0 - line) <= 1e-9 * (1.0 + line):
        # tangency: f touches the line from above, so f'(s0) matches its slope
        case, s1, patch = 1, s0, ()
        f1 = f_s0
        F_s1 = F_s0
    else:
        case = 2
        eps = 0.1 * s0
        s1 = s0 + eps
        v1 = f_s0 + eps * 0.5 * (fp_s0 + slope)
        patch = (f_s0, fp_s0, v1, slope)
        f1 = v1
        F_s1 = F_s0 + eps * (0.5 * (f_s0 + v1) + eps * (fp_s0 - slope) / 12.0)

    ft = TruncatedNonlinearity(base=spec, s0=s0, p=float(p), case=case, slope=slope,
                               s1=s1, patch=patch, f1=f1, F_s1=F_s1, F_s0=F_s0)
    if case == 2:
        ss = np.linspace(s0, s1, 101)
        if np.any(ft.f(ss) < slope * ss - 1e-9 * (1.0 + slope * s1)):
            raise ValidationError("C1 patch dips below the witness line; "
                                  "choose a larger s0")
        dd = np.diff(ft.f(ss))
        if np.any(dd < -1e-12 * (1.0 + abs(f1))):
            raise ValidationError("C1 patch is not monotone")
    return ft, bounds


# ---------------------------------------------------------------------------
# a priori certificates
# ---------------------------------------------------------------------------


def apriori(bounds: AprioriBounds, report) -> CertificateSet:
    """Measure a solve report against the constant chain.

    Upper bounds apply to the lambda-shift family; the H1 lower bound applies
    to nontrivial solutions of the mu-damped family.
    """
    from .geometry import norm  # local import to avoid cycles in type hints

    certs = CertificateSet()
    u = report.solution
    if report.mu >= 1.0:
        certs.upper("L1_bound", norm(u, "L1"), bounds.K1,
                    note=f"lambda = {report.lambda_shift:g}")
        certs.upper("Linf_bound", norm(u, "Linf"), bounds.K_inf)
        certs.upper("H1_upper_bound", norm(u, "H1"), bounds.K2)
    else:
        sup = norm(u, "Linf")
        if sup <= 1e-6:
            certs.add("H1_lower_bound", norm(u, "H1"), bounds.k2, True,
                      note=f"trivial solution excluded (mu = {report.mu:g})")
        else:
            certs.lower("H1_lower_bound", norm(u, "H1"), bounds.k2,
                        note=f"mu = {report.mu:g}")
    return certs

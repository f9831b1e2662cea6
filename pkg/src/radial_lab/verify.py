"""Numerical verification suites, one per structural statement.

Each suite runs deterministic randomized checks and reports measured values
against bounds; negative controls are included where a statement has a
testable converse. Suites gather evidence, they do not prove anything.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import jn_zeros

from .cone import ConeWindow, check_cone
from .errors import ParameterError
from .geometry import RadialFunction, build_grid, grid_function, integrate, norm, wrap
from .linear_operator import (UNIT_WEIGHT, WeightSpec, ZERO_DRIFT, assemble,
                              h1_form, radial_eigs, solve_T, solve_values)
from .nonlinearity import (fixed_points, power_family, saturating_family,
                           three_crossing_family, truncate, validate)
from .reporting import CertificateSet
from .sampling import random_cone_function, random_cone_values, random_valid_drift
from .solver import SolveOptions, homotopy, krasnoselskii_certificates, solve
from .variational import FlowParams, energy_values, flow, tangent_probe

SUITE_NAMES = ("embedding", "embedding_counterexample", "cone_map", "eigen",
               "constant_only", "bounds", "flow_invariance", "tangent")


@dataclass
class SuiteReport:
    suite: str
    checks: CertificateSet
    seed: int
    config: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.checks.all_passed


def worker_count() -> int:
    raw = os.environ.get("RADIAL_LAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_suite(name: str, config: dict | None = None) -> SuiteReport:
    """Run one named suite with its default configuration overridden by config."""
    if name not in SUITE_NAMES:
        raise ParameterError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
    config = dict(config or {})
    seed = int(config.pop("seed", 0))
    t0 = time.time()
    checks = _SUITES[name](seed, config)
    return SuiteReport(suite=name, checks=checks, seed=seed, config=config,
                       elapsed=time.time() - t0)


def run_suites(names=SUITE_NAMES, config: dict | None = None) -> list[SuiteReport]:
    """Run several suites (in parallel when RADIAL_LAB_THREADS > 1), merged
    deterministically by name."""
    workers = worker_count()
    if workers == 1:
        reports = [run_suite(n, config) for n in names]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda n: run_suite(n, config), names))
    return sorted(reports, key=lambda r: r.suite)


# ---------------------------------------------------------------------------
# individual suites
# ---------------------------------------------------------------------------


def _suite_embedding(seed, config):
    N = int(config.get("dim", 3))
    n = int(config.get("n", 512))
    samples = int(config.get("samples", 1000))
    grid = build_grid(N, n)
    rng = np.random.default_rng(seed)
    bound = 2.0**N / grid.sphere_area
    worst = 0.0
    for _ in range(samples):
        u = random_cone_function(grid, rng, scale=float(rng.uniform(0.05, 20.0)))
        w11 = norm(u, "W11")
        if w11 > 0.0:
            worst = max(worst, norm(u, "Linf") / w11)
    checks = CertificateSet()
    checks.upper("sup_to_W11_ratio", worst, bound,
                 note=f"{samples} random cone functions, N={N}")
    return checks


def _suite_embedding_counterexample(seed, config):
    n = int(config.get("n", 4096))
    grid = build_grid(3, n)
    checks = CertificateSet()
    prev = math.inf
    for k in (2, 4, 8, 16):
        u = grid_function(grid, lambda r, k=k: np.power(r, 1.0 / k))
        diff = wrap(grid, u.values - 1.0)
        h1 = norm(diff, "H1")
        grad_sq = 4.0 * math.pi / (k * k * (1.0 + 2.0 / k))
        l2_sq = 4.0 * math.pi * (1.0 / (3.0 + 2.0 / k)
                                 - 2.0 / (3.0 + 1.0 / k) + 1.0 / 3.0)
        exact = math.sqrt(grad_sq + l2_sq)
        checks.upper(f"H1_gap_matches_closed_form_k={k}",
                     abs(h1 - exact) / exact, 0.01)
        checks.upper(f"H1_gap_decreases_k={k}", h1, prev)
        checks.add(f"sup_gap_stays_one_k={k}", norm(diff, "Linf"), 1.0,
                   abs(norm(diff, "Linf") - 1.0) <= 1e-12)
        prev = h1
    return checks


def _suite_cone_map(seed, config):
    N = int(config.get("dim", 2))
    n = int(config.get("n", 512))
    samples = int(config.get("samples", 1000))
    drifts = int(config.get("drifts", 5))
    grid = build_grid(N, n)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(drifts):
        op = assemble(grid, random_valid_drift(grid, rng))
        for _ in range(samples // drifts):
            w = random_cone_function(grid, rng, scale=float(rng.uniform(0.1, 5.0)))
            v = solve_T(op, w)
            rep = check_cone(v, tol=0.0)
            worst = max(worst, -rep.min_value, rep.max_monotonicity_violation)
    checks = CertificateSet()
    checks.upper("image_cone_violation", worst, 1e-10,
                 note=f"{samples} monotone inputs x {drifts} admissible drifts")
    decreasing = wrap(grid, 1.0 - grid.nodes)
    checks.add("negative_control_premise", 0.0, 0.0,
               not check_cone(decreasing, tol=1e-10).in_cone,
               note="a decreasing input must fail the cone premise")
    return checks


def _suite_eigen(seed, config):
    n = int(config.get("n", 2048))
    checks = CertificateSet()
    t0 = time.time()
    for N, target in ((2, 1.0 + jn_zeros(1, 1)[0] ** 2),
                      (3, 1.0 + brentq(lambda x: math.tan(x) - x, 3.6, 4.6) ** 2)):
        grid = build_grid(N, n)
        pairs = radial_eigs(grid, 2)
        checks.upper(f"lambda1_is_one_N={N}", abs(pairs[0].value - 1.0), 1e-6)
        checks.upper(f"lambda2_matches_oracle_N={N}",
                     abs(pairs[1].value - target), 1e-3,
                     note=f"transcendental-root oracle {target:.6f}")
        v2 = pairs[1].function
        checks.upper(f"eigenfunction_zero_mean_N={N}", abs(integrate(v2)), 1e-8)
        rep = check_cone(wrap(grid, v2.values - np.min(v2.values)), tol=1e-10)
        checks.add(f"eigenfunction_monotone_N={N}",
                   rep.max_monotonicity_violation, 1e-10, rep.in_cone)
        signs = np.sign(v2.values[np.abs(v2.values) > 1e-12])
        flips = int(np.sum(signs[1:] != signs[:-1]))
        checks.add(f"eigenfunction_one_sign_change_N={N}", flips, 1, flips == 1)
    checks.upper("runtime_seconds", time.time() - t0, 5.0)
    return checks


def _suite_constant_only(seed, config):
    n = int(config.get("n", 256))
    runs = int(config.get("samples", 50))
    grid = build_grid(2, n)
    spec = saturating_family(2.0)
    u0 = 1.0  # g(u0) = 1 for lambda_star = 2
    rng = np.random.default_rng(seed)
    opts = SolveOptions(tol=1e-9)
    nonconstant = 0
    failures = 0
    worst_dev = 0.0
    for _ in range(runs):
        seed_fn = random_cone_function(grid, rng, scale=float(rng.uniform(0.2, 3.0)))
        rep = solve(grid, UNIT_WEIGHT, ZERO_DRIFT, spec, seed_fn, opts)
        if not rep.converged:
            failures += 1
            continue
        sup = norm(rep.solution, "Linf")
        if sup <= 1e-8:
            continue  # trivial branch
        dev = float(np.max(np.abs(rep.solution.values - u0)))
        worst_dev = max(worst_dev, dev)
        if dev > 1e-6:
            nonconstant += 1
    checks = CertificateSet()
    checks.add("all_multistarts_converged", failures, 0, failures == 0,
               note=f"{runs} random cone seeds")
    checks.add("no_nonconstant_limit_points", nonconstant, 0, nonconstant == 0,
               note=f"worst deviation from the constant: {worst_dev:.2e}; "
                    "evidence only, not a uniqueness proof")
    pairs = radial_eigs(grid, 2)
    fp_u0 = float(np.asarray(spec.fprime(np.array([u0])))[0])
    curvature = pairs[1].value - fp_u0
    checks.lower("mechanism_absent_curvature", curvature, 0.0,
                 note="second variation at the constant stays positive")
    return checks


def _suite_bounds(seed, config):
    n = int(config.get("n", 256))
    grid = build_grid(2, n)
    a = WeightSpec(a=lambda r: 1.0 + r * r, label="1+r^2")
    spec = power_family(3)
    report = validate(spec, a.a0)
    ft, bounds = truncate(spec, grid, report, a0=a.a0, a1=a.a1)
    seed_fn = wrap(grid, np.full(n + 1, max(bounds.lambda_bar, 1.0)))
    opts = SolveOptions(tol=1e-9)
    base = solve(grid, a, ZERO_DRIFT, spec, seed_fn, opts)
    lam_family = [0.0, bounds.lambda_bar / 4.0, bounds.lambda_bar / 2.0]
    lam_reports = homotopy(grid, a, ZERO_DRIFT, spec, {"lambda_shift": lam_family},
                           base.solution, bounds, opts)
    mu_reports = homotopy(grid, a, ZERO_DRIFT, spec, {"mu": [0.9, 0.6, 0.3]},
                          base.solution, bounds, opts)
    checks = CertificateSet()
    converged = [r for r in lam_reports + mu_reports if r.converged]
    checks.add("continuation_produced_solutions", len(converged), 4,
               len(converged) >= 4,
               note="nonconvergence at a fold is recorded, not failed")
    for r in lam_reports + mu_reports:
        label = (f"lambda={r.lambda_shift:g}" if r.mu >= 1.0 else f"mu={r.mu:g}")
        if not r.converged:
            checks.add(f"nonconvergence_marker_{label}", float("nan"),
                       float("nan"), True, note="no solution found (data)")
            continue
        for cert in r.certificates:
            if cert.name.endswith("bound"):
                checks.add(f"{cert.name}_{label}", cert.measured, cert.bound,
                           cert.passed)
    checks.extend(krasnoselskii_certificates(lam_reports + mu_reports, bounds,
                                             rng_seed=seed))
    return checks


def _suite_flow_invariance(seed, config):
    n = int(config.get("n", 256))
    grid = build_grid(2, n)
    spec = power_family(20)
    ft, bounds = truncate(spec, grid, validate(spec, 1.0))
    window = ConeWindow(0.0, 1.0, math.inf, source=spec)
    rng = np.random.default_rng(seed)
    checks = CertificateSet()

    u = wrap(grid, random_cone_values(grid, rng, scale=1.2))
    level_far = energy_values(grid, ft, u.values) + 100.0
    res = flow(u, ft, None, FlowParams(level=level_far, epsilon=1.0, step=0.01),
               window)
    checks.add("identity_outside_band", 0.0, 0.0, res.u is u,
               note="cutoff vanishes; output is the input object")

    h = 0.005
    worst_increase = -math.inf
    drift_off = 0.0
    drift_on = 0.0
    for _ in range(10):
        u = wrap(grid, random_cone_values(grid, rng, scale=1.5))
        res_on = flow(u, ft, None, FlowParams(level=None, step=h,
                                              max_duration=100 * h), window)
        worst_increase = max(worst_increase, float(np.max(np.diff(res_on.energies)))
                             if len(res_on.energies) > 1 else -math.inf)
        drift_on = max(drift_on, res_on.cone_drift)
        res_off = flow(u, ft, None, FlowParams(level=None, step=h,
                                               max_duration=100 * h,
                                               projection_mode=False), window)
        drift_off = max(drift_off, res_off.cone_drift)
    checks.upper("energy_increase_per_step", worst_increase, 1e-12)
    checks.add("drift_with_projection", drift_on, 0.0, drift_on == 0.0)
    checks.upper("drift_without_projection", drift_off, 50.0 * h)

    worst_T = 0.0
    worst_mix = 0.0
    op = assemble(grid, ZERO_DRIFT)
    for _ in range(20):
        u = wrap(grid, np.minimum(random_cone_values(grid, rng, scale=1.0), 5.0))
        v = solve_values(op, np.asarray(ft.f(u.values)))
        rep = check_cone(wrap(grid, v), window, tol=0.0)
        worst_T = max(worst_T, -min(rep.min_value - window.u_minus, 0.0),
                      rep.max_monotonicity_violation)
        lam = rng.uniform(0.0, 1.0)
        mix = (1.0 - lam) * u.values + lam * v
        repm = check_cone(wrap(grid, mix), window, tol=1e-14)
        worst_mix = max(worst_mix, rep.max_monotonicity_violation,
                        -min(repm.min_value - window.u_minus, 0.0))
    checks.upper("operator_preserves_window", worst_T, 1e-10)
    checks.upper("euler_segment_stays_in_window", worst_mix, 1e-12,
                 note="convex combination of a state and its operator image")
    return checks


def _suite_tangent(seed, config):
    n = int(config.get("n", 512))
    grid = build_grid(2, n)
    pairs = radial_eigs(grid, 2)
    lam2 = pairs[1].value
    checks = CertificateSet()

    spec = power_family(20)
    ft, _ = truncate(spec, grid, validate(spec, 1.0))
    window = fixed_points(spec, 10.0, lambda2_rad=lam2).window
    probe = tangent_probe(window, pairs[1], ft, grid)
    checks.add("mechanism_present_p20", probe.curvature, 0.0,
               probe.mechanism_present, note="curvature lambda2 - f'(u0)")
    checks.upper("curvature_matches_rayleigh", abs(probe.curvature - (lam2 - 20.0)),
                 1e-8)
    mid = len(probe.s_values) // 2
    checks.upper("g_at_zero", abs(probe.g_values[mid] - 1.0), 1e-10)
    ds = probe.s_values[mid + 1] - probe.s_values[mid]
    gprime = (probe.g_values[mid + 1] - probe.g_values[mid - 1]) / (2.0 * ds)
    checks.upper("g_slope_at_zero", abs(gprime), ds,
                 note="the linear coefficient sits below the probe resolution")
    worst_gap = float(np.max(probe.gaps[np.abs(probe.s_values) > 0.0]))
    checks.add("energy_gaps_negative", worst_gap, 0.0, probe.gaps_negative)

    neg = saturating_family(2.0)
    ftn, _ = truncate(neg, grid, validate(neg, 1.0))
    wneg = ConeWindow(0.0, 1.0, math.inf, source=neg)
    probe_neg = tangent_probe(wneg, pairs[1], ftn, grid)
    checks.lower("negative_control_curvature", probe_neg.curvature, 0.0,
                 note="saturating family: mechanism absent")
    checks.add("negative_control_reported_absent", 0.0, 0.0,
               not probe_neg.mechanism_present)
    return checks


_SUITES = {
    "embedding": _suite_embedding,
    "embedding_counterexample": _suite_embedding_counterexample,
    "cone_map": _suite_cone_map,
    "eigen": _suite_eigen,
    "constant_only": _suite_constant_only,
    "bounds": _suite_bounds,
    "flow_invariance": _suite_flow_invariance,
    "tangent": _suite_tangent,
}

"""Command-line interface: config parsing, pipelines, CSV/JSON output.

Subcommands: eigen, solve, homotopy, mountain-pass, probe, verify. Reports
are written as a JSON document plus a CSV solution profile; the exit code is
0 when every certificate passed, 1 otherwise, 2 on usage errors.
"""

import argparse
import configparser
import csv
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import verify as verify_mod
from .errors import MechanismError, RadialLabError
from .geometry import (RadialFunction, build_grid, derivative_values, norm, wrap)
from .linear_operator import (DriftSpec, WeightSpec, ZERO_DRIFT, radial_eigs)
from .mountain_pass import (admissible_sets, certify_nonconstant, initial_path,
                            minimax)
from .nonlinearity import (compute_bounds, fixed_points, lambda_bar_of,
                           power_family, saturating_family, spline_family,
                           three_crossing_family, truncate, validate)
from .reporting import CertificateSet
from .solver import SolveOptions, homotopy, krasnoselskii_certificates, solve
from .variational import FlowParams, energy_values, tangent_probe


class UsageError(RadialLabError):
    """Bad flags, config keys, or family strings; maps to exit code 2."""


# ---------------------------------------------------------------------------
# function families and coefficient expressions
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(
    r"^(?P<coef>[0-9.eE+-]+)?(?P<star>\*)?(?P<r>r(\^(?P<pow>\d+))?)?(/(?P<div>[0-9.eE+]+))?$"
)


def parse_polynomial(expr: str):
    """Parse sums of c*r^k terms ("1", "1+r", "1+r^2", "-r/2") into a
    vectorized callable plus its normalized label."""
    cleaned = expr.replace(" ", "").replace("²", "^2").replace("³", "^3")
    if not cleaned:
        raise UsageError("empty coefficient expression")
    body = cleaned.replace("-", "+-")
    terms = [t for t in body.split("+") if t]
    parsed = []
    for term in terms:
        m = _TERM_RE.match(term)
        if m is None or (m.group("coef") is None and m.group("r") is None):
            raise UsageError(f"cannot parse term {term!r} of {expr!r}")
        coef_text = m.group("coef")
        if coef_text in (None, "", "-"):
            coef = -1.0 if coef_text == "-" else 1.0
        else:
            try:
                coef = float(coef_text)
            except ValueError as exc:
                raise UsageError(f"bad coefficient in {term!r}") from exc
        power = 0
        if m.group("r"):
            power = int(m.group("pow") or 1)
        if m.group("div"):
            coef /= float(m.group("div"))
        parsed.append((coef, power))

    def fn(r, parsed=tuple(parsed)):
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros_like(r)
        for coef, power in parsed:
            out += coef * r**power
        return out

    return fn, cleaned


def parse_weight(expr: str) -> WeightSpec:
    fn, label = parse_polynomial(expr)
    return WeightSpec(a=fn, label=label)


def parse_drift(expr: str) -> DriftSpec:
    fn, label = parse_polynomial(expr)
    return DriftSpec(b=fn, label=label)


def parse_family(text: str):
    """Named nonlinearity families: power:p, saturating:lam,
    spline:@file.csv[,tail], three-crossing."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "power":
            return power_family(float(arg))
        if name == "saturating":
            return saturating_family(float(arg))
        if name == "three-crossing":
            return three_crossing_family()
        if name == "spline":
            path, _, tail = arg.partition(",")
            if not path.startswith("@"):
                raise UsageError("spline family expects spline:@file.csv[,tail]")
            knots, values, slopes = _read_spline_table(path[1:])
            return spline_family(knots, values, slopes,
                                 tail=float(tail) if tail else 0.0)
    except (ValueError, RadialLabError) as exc:
        raise UsageError(f"bad nonlinearity {text!r}: {exc}") from exc
    raise UsageError(f"unknown nonlinearity family {text!r}")


def _read_spline_table(path: str):
    knots, values, slopes = [], [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "knot":
                continue
            knots.append(float(row[0]))
            values.append(float(row[1]))
            slopes.append(float(row[2]))
    return knots, values, slopes


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

PROBLEM_KEYS = {"dim", "n", "f", "a", "b", "seed"}
COMMAND_KEYS = {
    "eigen": {"k"},
    "solve": {"seed_value", "tol", "lambda", "mu"},
    "homotopy": {"family", "values", "tol"},
    "mountain-pass": {"p_points", "rounds", "step", "burst", "eigen_index",
                      "s0", "exponent"},
    "probe": {"eigen_index"},
    "verify": {"suite", "samples", "suite_n"},
}


@dataclass
class RunConfig:
    command: str
    dim: int = 2
    n: int = 512
    f: str = "power:20"
    a: str = "1"
    b: str = "0"
    seed: int = 0
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"command": self.command, "dim": self.dim, "n": self.n,
               "f": self.f, "a": self.a, "b": self.b, "seed": self.seed}
        out.update({k: v for k, v in sorted(self.options.items())})
        return out

    def write(self, path: str) -> None:
        cp = configparser.ConfigParser()
        cp["problem"] = {"dim": str(self.dim), "n": str(self.n), "f": self.f,
                         "a": self.a, "b": self.b, "seed": str(self.seed)}
        cp[self.command] = {k: str(v) for k, v in self.options.items()}
        with open(path, "w") as fh:
            cp.write(fh)


def read_config(path: str, command: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path}")
    merged: dict = {}
    for section in cp.sections():
        if section == "problem":
            for key, value in cp["problem"].items():
                if key not in PROBLEM_KEYS:
                    raise UsageError(f"unknown config key [problem] {key}")
                merged[key] = value
        elif section == command:
            for key, value in cp[section].items():
                if key not in COMMAND_KEYS[command]:
                    raise UsageError(f"unknown config key [{section}] {key}")
                merged[key] = value
        else:
            raise UsageError(f"unknown config section [{section}]")
    return merged


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def write_profile(path: str, u: RadialFunction) -> None:
    d = derivative_values(u.grid, u.values)
    with open(path, "w") as fh:
        fh.write("r,u,du_dr\n")
        for r, val, dv in zip(u.grid.nodes, u.values, d):
            fh.write(f"{r:.17g},{val:.17g},{dv:.17g}\n")


def read_profile(path: str, dim: int) -> RadialFunction:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            rows.append(float(row[1]))
    return wrap(build_grid(dim, len(rows) - 1), rows)


def _report_json(cfg: RunConfig, certificates: CertificateSet, extras: dict,
                 timings: dict) -> str:
    report = {
        "config": cfg.as_dict(),
        "certificates": certificates.as_list(),
        "energy": extras.pop("energy", None),
        "residual_inf": extras.pop("residual_inf", None),
        "iterations": extras.pop("iterations", None),
        "lambda2_rad": extras.pop("lambda2_rad", None),
        "timings": timings,
    }
    report.update(extras)
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False,
                      default=_json_default)


def _json_default(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    raise TypeError(f"not JSON serializable: {value!r}")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


# ---------------------------------------------------------------------------
# subcommand pipelines
# ---------------------------------------------------------------------------


def _prepare(cfg: RunConfig):
    grid = build_grid(cfg.dim, cfg.n)
    weight = parse_weight(cfg.a)
    drift = parse_drift(cfg.b)
    spec = parse_family(cfg.f)
    return grid, weight, drift, spec


def cmd_eigen(cfg: RunConfig):
    grid = build_grid(cfg.dim, cfg.n)
    k = int(cfg.options.get("k", 2))
    pairs = radial_eigs(grid, k)
    certs = CertificateSet()
    extras = {"lambda": [p.value for p in pairs],
              "lambda2_rad": pairs[1].value if len(pairs) > 1 else None}
    profile = None
    if len(pairs) > 1:
        v2 = pairs[1].function
        mean = abs(float(grid.weights @ v2.values))
        certs.upper("eigenfunction_zero_mean", mean, 1e-8)
        from .cone import check_cone

        shifted = wrap(grid, v2.values - float(np.min(v2.values)))
        certs.add("eigenfunction_monotone",
                  check_cone(shifted, tol=1e-10).max_monotonicity_violation,
                  1e-10, check_cone(shifted, tol=1e-10).in_cone)
        profile = pairs[-1].function
    return certs, extras, profile


def cmd_solve(cfg: RunConfig):
    grid, weight, drift, spec = _prepare(cfg)
    report = validate(spec, weight.a0)
    certs = CertificateSet()
    for check in report.checks:
        certs.add(f"hypothesis_{check.name}", float("nan"), float("nan"),
                  check.passed, note=check.detail)
    if not report.passed:
        return certs, {"residual_inf": None, "iterations": None}, None
    lam_bar = lambda_bar_of(spec, hi=1e3 * max(1.0, report.m_witness))
    seed_value = float(cfg.options.get("seed_value", max(lam_bar, 1.0)))
    seed_fn = wrap(grid, np.full(cfg.n + 1, seed_value))
    opts = SolveOptions(tol=float(cfg.options.get("tol", 1e-9)))
    rep = solve(grid, weight, drift, spec, seed_fn, opts,
                lambda_shift=float(cfg.options.get("lambda", 0.0)),
                mu=float(cfg.options.get("mu", 1.0)))
    certs.add("converged", rep.residual_inf,
              opts.tol * (1.0 + norm(rep.solution, "Linf")), rep.converged)
    certs.extend(rep.certificates)
    extras = {"residual_inf": rep.residual_inf, "iterations": rep.iterations,
              "method": rep.method, "u_center": float(rep.solution.values[0]),
              "u_boundary": float(rep.solution.values[-1])}
    return certs, extras, rep.solution


def cmd_homotopy(cfg: RunConfig):
    grid, weight, drift, spec = _prepare(cfg)
    report = validate(spec, weight.a0)
    if not report.passed:
        raise UsageError("nonlinearity fails (f1)-(f3); homotopy needs the bounds")
    r = grid.nodes
    sup_b = float(np.max(np.abs(np.asarray(drift.b(r)))))
    bounds = compute_bounds(spec, grid, report, a0=weight.a0, a1=weight.a1,
                            sup_b=sup_b)
    family_name = cfg.options.get("family", "lambda")
    raw = cfg.options.get("values", "")
    if raw:
        values = [float(v) for v in str(raw).split(",")]
    elif family_name == "lambda":
        values = [0.0, bounds.lambda_bar / 4.0, bounds.lambda_bar / 2.0]
    else:
        values = [0.9, 0.6, 0.3]
    key = "lambda_shift" if family_name == "lambda" else "mu"
    opts = SolveOptions(tol=float(cfg.options.get("tol", 1e-9)))
    seed_fn = wrap(grid, np.full(cfg.n + 1, max(bounds.lambda_bar, 1.0)))
    base = solve(grid, weight, drift, spec, seed_fn, opts)
    reports = homotopy(grid, weight, drift, spec, {key: values},
                       base.solution if base.converged else seed_fn,
                       bounds, opts)
    certs = CertificateSet()
    records = []
    for rep in reports:
        label = f"{family_name}={getattr(rep, key):g}"
        records.append({"value": getattr(rep, key), "converged": rep.converged,
                        "residual_inf": rep.residual_inf,
                        "iterations": rep.iterations})
        if rep.converged:
            for cert in rep.certificates:
                certs.add(f"{cert.name}[{label}]", cert.measured, cert.bound,
                          cert.passed, cert.note)
    if any(rep.converged for rep in reports):
        certs.extend(krasnoselskii_certificates(reports, bounds))
    extras = {"family": family_name, "records": records,
              "constants": {"lambda_bar": bounds.lambda_bar, "K1": bounds.K1,
                            "K_inf": bounds.K_inf, "K2": bounds.K2,
                            "k2": bounds.k2}}
    last = next((r for r in reversed(reports) if r.converged), None)
    return certs, extras, None if last is None else last.solution


def _window_pipeline(cfg: RunConfig):
    grid, weight, drift, spec = _prepare(cfg)
    eigen_index = int(cfg.options.get("eigen_index", 2))
    report = validate(spec, weight.a0)
    if not report.passed:
        bad = [c.name for c in report.checks if not c.passed]
        raise UsageError(f"nonlinearity fails hypotheses {bad}")
    pairs = radial_eigs(grid, eigen_index)
    lam_k = pairs[eigen_index - 1].value
    scan = fixed_points(spec, s_max=float(10.0), lambda2_rad=lam_k)
    if scan.window is None:
        # fall back to any unstable crossing so the probe can measure and
        # report the missing mechanism instead of erroring out
        scan = fixed_points(spec, s_max=float(10.0), lambda2_rad=0.0)
    if scan.window is None:
        raise UsageError(f"no admissible window: {scan.detail}")
    s0 = cfg.options.get("s0")
    p = cfg.options.get("exponent")
    ft, bounds = truncate(spec, grid, report, a0=weight.a0, a1=weight.a1,
                          s0=None if s0 is None else float(s0),
                          p=None if p is None else float(p))
    return grid, spec, ft, bounds, scan.window, pairs[eigen_index - 1], lam_k


def cmd_probe(cfg: RunConfig):
    grid, spec, ft, bounds, window, pair, lam_k = _window_pipeline(cfg)
    probe = tangent_probe(window, pair, ft, grid)
    certs = CertificateSet()
    certs.add("mechanism_present", probe.curvature, 0.0,
              probe.mechanism_present,
              note=f"curvature against radial eigenvalue {pair.index}")
    if probe.mechanism_present:
        worst = float(np.max(probe.gaps[np.abs(probe.s_values) > 0.0]))
        certs.add("energy_gaps_negative", worst, 0.0, probe.gaps_negative)
    extras = {"lambda2_rad": lam_k, "curvature": probe.curvature,
              "eps1": probe.eps1,
              "g_samples": _sanitize(np.c_[probe.s_values, probe.g_values]),
              "energy_gaps": _sanitize(probe.gaps),
              "exploratory": pair.index != 2}
    return certs, extras, None


def cmd_mountain_pass(cfg: RunConfig):
    grid, spec, ft, bounds, window, pair, lam_k = _window_pipeline(cfg)
    probe = tangent_probe(window, pair, ft, grid)
    certs = CertificateSet()
    certs.add("mechanism_present", probe.curvature, 0.0, probe.mechanism_present)
    if not probe.mechanism_present:
        return certs, {"lambda2_rad": lam_k}, None
    sets = admissible_sets(window, ft, grid)
    P = int(cfg.options.get("p_points", 33))
    try:
        path = initial_path(window, pair, sets, P=P)
    except MechanismError as exc:
        certs.add("initial_path", float("nan"), float("nan"), False,
                  note=str(exc))
        return certs, {"lambda2_rad": lam_k}, None
    step = float(cfg.options.get("step", 0.02))
    burst = float(cfg.options.get("burst", 5.0 * step))
    params = FlowParams(level=None, step=step, max_duration=burst)
    rep = minimax(path, ft, None, params,
                  max_rounds=int(cfg.options.get("rounds", 400)))
    certs.extend(rep.certificates)
    certs.extend(certify_nonconstant(rep.u_star, window, ft))
    I_u0 = energy_values(grid, ft, np.full(cfg.n + 1, window.u_zero))
    extras = {"lambda2_rad": lam_k, "level": rep.level,
              "energy": energy_values(grid, ft, rep.u_star.values),
              "constant_level": I_u0,
              "residual_inf": rep.residual_inf,
              "iterations": rep.rounds, "flags": rep.flags,
              "window": [window.u_minus, window.u_zero,
                         window.u_plus if window.bounded else None],
              "alpha": sets.alpha, "tau": sets.tau, "branch": sets.branch,
              "exploratory": pair.index != 2}
    return certs, extras, rep.u_star


def cmd_verify(cfg: RunConfig):
    suite = cfg.options.get("suite", "all")
    names = verify_mod.SUITE_NAMES if suite == "all" else tuple(suite.split(","))
    config = {"seed": cfg.seed}
    if "samples" in cfg.options:
        config["samples"] = int(cfg.options["samples"])
    if "suite_n" in cfg.options:
        config["n"] = int(cfg.options["suite_n"])
    reports = verify_mod.run_suites(names, config)
    certs = CertificateSet()
    extras = {"suites": {}}
    for rep in reports:
        for check in rep.checks:
            certs.add(f"{rep.suite}: {check.name}", check.measured, check.bound,
                      check.passed, check.note)
        extras["suites"][rep.suite] = {"passed": rep.passed,
                                       "checks": len(rep.checks),
                                       "seed": rep.seed}
    return certs, extras, None


_COMMANDS = {
    "eigen": cmd_eigen,
    "solve": cmd_solve,
    "homotopy": cmd_homotopy,
    "mountain-pass": cmd_mountain_pass,
    "probe": cmd_probe,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radial-lab",
        description="Increasing radial solutions of Neumann problems in the "
                    "unit ball: solver, mountain pass, and verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file; flags override it")
        p.add_argument("--dim", type=int, help="space dimension N >= 2")
        p.add_argument("--n", type=int, help="grid intervals")
        p.add_argument("--f", help="nonlinearity family, e.g. power:20")
        p.add_argument("--a", help="weight a(r), e.g. 1+r^2")
        p.add_argument("--b", help="drift b(r), e.g. -r/2")
        p.add_argument("--seed", type=int, help="RNG seed")
        p.add_argument("--out", default="radial-lab-run",
                       help="output prefix for the JSON report and CSV profile")

    p = sub.add_parser("eigen", help="radial Neumann eigenpairs of -Lap + 1")
    common(p)
    p.add_argument("--k", type=int, help="number of eigenpairs (<= 6)")

    p = sub.add_parser("solve", help="cone solution of the full problem")
    common(p)
    p.add_argument("--seed-value", dest="seed_value", type=float,
                   help="constant seed level")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--lambda", dest="lambda_", type=float,
                   help="additive shift of the right-hand side")
    p.add_argument("--mu", type=float, help="damping factor in (0, 1]")

    p = sub.add_parser("homotopy", help="continuation in the shift or damping")
    common(p)
    p.add_argument("--family", choices=("lambda", "mu"))
    p.add_argument("--values", help="comma-separated parameter list")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("mountain-pass", help="constrained minimax critical point")
    common(p)
    p.add_argument("--p-points", dest="p_points", type=int,
                   help="path resolution (odd, >= 17)")
    p.add_argument("--rounds", type=int, help="descent round budget")
    p.add_argument("--step", type=float, help="flow step")
    p.add_argument("--burst", type=float, help="flow burst duration per round")
    p.add_argument("--eigen-index", dest="eigen_index", type=int,
                   help="tilt eigenfunction index (3+ is exploratory)")
    p.add_argument("--s0", type=float, help="truncation point override")
    p.add_argument("--exponent", type=float, help="truncation growth exponent")

    p = sub.add_parser("probe", help="second-eigenvalue descent mechanism probe")
    common(p)
    p.add_argument("--eigen-index", dest="eigen_index", type=int)

    p = sub.add_parser("verify", help="named verification suites")
    common(p)
    p.add_argument("--suite", help="suite name(s) or 'all'")
    p.add_argument("--samples", type=int, help="sample count override")
    p.add_argument("--suite-n", dest="suite_n", type=int,
                   help="grid intervals override for suites")
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    file_cfg = read_config(args.config, command) if args.config else {}

    def pick(flag, key, default, cast):
        if flag is not None:
            return cast(flag)
        if key in file_cfg:
            return cast(file_cfg[key])
        return default

    cfg = RunConfig(
        command=command,
        dim=pick(args.dim, "dim", 2, int),
        n=pick(args.n, "n", 512, int),
        f=pick(args.f, "f", "power:20", str),
        a=pick(args.a, "a", "1", str),
        b=pick(args.b, "b", "0", str),
        seed=pick(args.seed, "seed", 0, int),
    )
    flag_names = {
        "eigen": [("k", "k", int)],
        "solve": [("seed_value", "seed_value", float), ("tol", "tol", float),
                  ("lambda_", "lambda", float), ("mu", "mu", float)],
        "homotopy": [("family", "family", str), ("values", "values", str),
                     ("tol", "tol", float)],
        "mountain-pass": [("p_points", "p_points", int), ("rounds", "rounds", int),
                          ("step", "step", float), ("burst", "burst", float),
                          ("eigen_index", "eigen_index", int), ("s0", "s0", float),
                          ("exponent", "exponent", float)],
        "probe": [("eigen_index", "eigen_index", int)],
        "verify": [("suite", "suite", str), ("samples", "samples", int),
                   ("suite_n", "suite_n", int)],
    }
    for attr, key, cast in flag_names.get(command, []):
        flag = getattr(args, attr, None)
        if flag is not None:
            cfg.options[key] = cast(flag)
        elif key in file_cfg:
            cfg.options[key] = cast(file_cfg[key])
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    t0 = time.time()
    try:
        cfg = _merge_config(args)
        certificates, extras, profile = _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RadialLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    timings = {"total_seconds": time.time() - t0}
    out_json = f"{args.out}.json"
    with open(out_json, "w") as fh:
        fh.write(_report_json(cfg, certificates, _sanitize(extras), timings))
        fh.write("\n")
    if profile is not None:
        write_profile(f"{args.out}.csv", profile)
    for cert in certificates:
        state = "PASS" if cert.passed else "FAIL"
        print(f"[{state}] {cert.name}: measured={cert.measured:.6g} "
              f"bound={cert.bound:.6g} {cert.note}")
    ok = certificates.all_passed
    print(f"{'all certificates passed' if ok else 'certificate failures'}; "
          f"report: {out_json}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

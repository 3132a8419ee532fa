"""Command-line front end: ``postselect-qkd {gain,optimize,sweep,distance-bound,simulate}``.

stdout carries data only (CSV with ``#`` header comments, or JSON lines);
diagnostics go to stderr. Exit codes: 0 success, 2 usage or domain error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .attacks import (
    DEFAULT_LOSS_DB_PER_KM,
    AttackKind,
    AttackScenario,
    ct_security_condition,
    distance_bound,
    eta_from_distance,
)
from .core import IntegrationError
from .keygain import optimize_gain, secure_key_gain
from .simulator import (
    ProtocolRunConfig,
    analytic_ber,
    analytic_retained_fraction,
    empirical_density_check,
    simulate,
)

SCHEMA_VERSION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
SWEEP_VARIABLES = ("loss", "distance", "delta", "n", "x0")


class UsageError(ValueError):
    pass


@dataclass
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    attack: str = AttackKind.BEAMSPLIT.value
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise UsageError(f"unknown sweep variable {self.variable!r}")
        if self.points < 2:
            raise UsageError("a sweep needs at least 2 points")
        if not self.start < self.stop:
            raise UsageError("sweep start must be below stop")

    def values(self):
        return np.linspace(self.start, self.stop, self.points).tolist()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    return str(v)


class Writer:
    def __init__(self, fmt, stream, comments=()):
        self.fmt = fmt
        self.stream = stream
        self.header = None
        self.comments = list(comments)

    def row(self, d):
        d = {k: (float(v) if isinstance(v, np.floating) else v) for k, v in d.items()}
        if self.fmt == "json":
            self.stream.write(json.dumps({"schema_version": SCHEMA_VERSION, **d}) + "\n")
            return
        if self.header is None:
            for c in self.comments:
                self.stream.write(f"# {c}\n")
            self.header = list(d)
            self.stream.write(",".join(self.header) + "\n")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow([_fmt(d.get(k, "")) for k in self.header])
        self.stream.write(buf.getvalue())


def _resolve_eta(args, required=True):
    given = [v is not None for v in (args.eta, args.loss, args.distance_km)]
    if sum(given) > 1:
        raise UsageError("give only one of --eta, --loss, --distance-km")
    if args.eta is not None:
        return args.eta
    if args.loss is not None:
        return 1.0 - args.loss
    if args.distance_km is not None:
        return eta_from_distance(args.distance_km, args.loss_coeff_db_km)
    if required:
        raise UsageError("one of --eta, --loss, --distance-km is required")
    return None


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _scenario(args, eta):
    return AttackScenario.build(args.attack, eta, observed_variance=args.variance, delta=args.delta)


def _gain_row(scenario, n, x0, per_sent_pulse=False):
    res = secure_key_gain(scenario.signal(n), x0, scenario.renyi_model(n), per_sent_pulse)
    return {
        "attack": scenario.kind.value,
        "eta": scenario.eta,
        "n": float(n),
        "x0": float(x0),
        "variance": scenario.observed_variance,
        "delta": scenario.delta,
        "gain": res.gain,
        "shannon_part": res.shannon_part,
        "renyi_bound": res.renyi_bound,
        "retained_fraction": res.retained_fraction,
    }


def _optimize_row(scenario, n_bounds, grid_n, grid_x0, x0_sigmas=10.0):
    res = optimize_gain(
        scenario.eta,
        scenario.observed_variance,
        scenario.renyi_model,
        n_bounds=n_bounds,
        grid_n=grid_n,
        grid_x0=grid_x0,
        x0_sigmas=x0_sigmas,
    )
    return {
        "attack": scenario.kind.value,
        "eta": scenario.eta,
        "variance": scenario.observed_variance,
        "delta": scenario.delta,
        **res.as_dict(),
    }


def _defaults_comments(args):
    return [
        f"postselect-qkd {__version__} schema {SCHEMA_VERSION}",
        f"attack={args.attack} loss_coeff_db_km={args.loss_coeff_db_km!r}",
    ]


def cmd_gain(args, out):
    _require(args, "n", "x0")
    eta = _resolve_eta(args)
    row = _gain_row(_scenario(args, eta), args.n, args.x0, args.per_sent_pulse)
    Writer(args.format, out, _defaults_comments(args)).row(row)


def cmd_optimize(args, out):
    eta = _resolve_eta(args)
    row = _optimize_row(
        _scenario(args, eta), (args.n_min, args.n_max), args.grid_n, args.grid_x0, args.x0_sigmas
    )
    Writer(args.format, out, _defaults_comments(args) + [f"n_bounds=({args.n_min!r}, {args.n_max!r})"]).row(row)


def cmd_distance_bound(args, out):
    _require(args, "delta")
    eta = _resolve_eta(args, required=False)
    km = distance_bound(args.delta, args.loss_coeff_db_km)
    row = {
        "delta": args.delta,
        "eta_min": min(args.delta / 2.0, 1.0) if args.delta > 0 else 0.0,
        "distance_km": km,
        "loss_coeff_db_km": args.loss_coeff_db_km,
    }
    if eta is not None:
        row["eta"] = eta
        row["security"] = ct_security_condition(eta, args.delta).value
    Writer(args.format, out, _defaults_comments(args)).row(row)


def _sweep_point(job):
    """One sweep row; module-level so process pools can pickle it."""
    variable, value, opts = job
    try:
        if variable == "delta":
            km = distance_bound(value, opts["loss_coeff"])
            return {"delta": value, "eta_min": min(value / 2.0, 1.0), "distance_km": km}
        if variable in ("loss", "distance"):
            eta = 1.0 - value if variable == "loss" else eta_from_distance(value, opts["loss_coeff"])
            scenario = AttackScenario.build(opts["attack"], eta, opts["variance"], opts["delta"])
            if opts["optimize"]:
                r = _optimize_row(
                    scenario, opts["n_bounds"], opts["grid_n"], opts["grid_x0"], opts["x0_sigmas"]
                )
                row = {variable: value, "eta": eta, "best_gain": r["best_gain"],
                       "best_x0": r["best_x0"], "best_n": r["best_n"], "converged": r["converged"]}
            else:
                r = _gain_row(scenario, opts["n"], opts["x0"])
                row = {variable: value, "eta": eta, "gain": r["gain"], "x0": opts["x0"], "n": opts["n"]}
        else:
            scenario = AttackScenario.build(opts["attack"], opts["eta"], opts["variance"], opts["delta"])
            n = value if variable == "n" else opts["n"]
            x0 = value if variable == "x0" else opts["x0"]
            r = _gain_row(scenario, n, x0)
            row = {variable: value, "eta": opts["eta"], "gain": r["gain"], "x0": x0, "n": n}
        row["error"] = ""
        return row
    except (ValueError, ArithmeticError) as exc:
        return {variable: value, "error": f"{type(exc).__name__}: {exc}"}


_SWEEP_COLUMNS = {
    "delta": ["delta", "eta_min", "distance_km"],
    "opt": ["eta", "best_gain", "best_x0", "best_n", "converged"],
    "fixed": ["eta", "gain", "x0", "n"],
}


def cmd_sweep(args, out):
    spec = SweepSpec(args.variable, args.start, args.stop, args.points, args.attack)
    var = spec.variable
    optimize = var in ("loss", "distance") and not args.no_optimize
    if var in ("n", "x0"):
        spec.fixed["eta"] = _resolve_eta(args)
        _require(args, "x0" if var == "n" else "n")
    elif var in ("loss", "distance") and args.no_optimize:
        _require(args, "n", "x0")
    opts = {
        "attack": args.attack,
        "variance": args.variance,
        "delta": args.delta,
        "loss_coeff": args.loss_coeff_db_km,
        "optimize": optimize,
        "n_bounds": (args.n_min, args.n_max),
        "grid_n": args.grid_n,
        "grid_x0": args.grid_x0,
        "x0_sigmas": args.x0_sigmas,
        "n": args.n,
        "x0": args.x0,
        **spec.fixed,
    }
    if var == "delta":
        columns = [*_SWEEP_COLUMNS["delta"]]
    else:
        columns = [var, *(_SWEEP_COLUMNS["opt"] if optimize else _SWEEP_COLUMNS["fixed"])]
    columns.append("error")
    jobs = [(var, v, opts) for v in spec.values()]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    comments = _defaults_comments(args) + [
        f"sweep {var} {spec.start!r}..{spec.stop!r} points={spec.points} optimize={optimize}"
    ]
    writer = Writer(args.format, out, comments)
    ok = 0
    for row in rows:
        if not row.get("error"):
            ok += 1
        else:
            print(f"sweep point {var}={row[var]!r} failed: {row['error']}", file=sys.stderr)
        writer.row({c: row.get(c, "") for c in columns})
    return 0 if ok else EXIT_NUMERIC


def cmd_simulate(args, out):
    _require(args, "n")
    eta = _resolve_eta(args)
    x0 = 0.0 if args.x0 is None else args.x0
    scenario = _scenario(args, eta)
    cfg = ProtocolRunConfig(args.pulses, args.n, scenario, x0, args.seed)
    run = simulate(cfg, workers=args.workers)
    p = cfg.signal
    ber_a = analytic_ber(p, x0)
    row = {
        "attack": scenario.kind.value,
        "eta": eta,
        "n": args.n,
        "x0": x0,
        **run.as_dict(),
        "analytic_ber": ber_a,
        "ber_standard_error": math.sqrt(ber_a * (1 - ber_a) / run.retained) if run.retained else math.nan,
        "analytic_retained_fraction": analytic_retained_fraction(p, x0),
        "analytic_variance": scenario.observed_variance,
    }
    if args.density_check:
        chk = empirical_density_check(cfg, bins=args.bins, workers=args.workers)
        row.update(chi2=chk.statistic, chi2_dof=chk.dof, chi2_p_value=chk.p_value)
    if args.format == "csv":
        row.pop("by_basis")
    Writer(args.format, out, _defaults_comments(args)).row(row)


def build_parser():
    parser = argparse.ArgumentParser(prog="postselect-qkd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eta", type=float, help="channel transmission in (0, 1]")
    common.add_argument("--loss", type=float, help="channel loss 1 - eta")
    common.add_argument("--distance-km", type=float, help="fiber length; eta from --loss-coeff-db-km")
    common.add_argument("--n", type=float, help="mean photon number per pulse")
    common.add_argument("--x0", type=float, help="postselection threshold")
    common.add_argument("--variance", type=float, help="observed quadrature variance")
    common.add_argument("--delta", type=float, help="normalized excess noise")
    common.add_argument("--attack", default="beamsplit", choices=[k.value for k in AttackKind])
    common.add_argument("--loss-coeff-db-km", type=float, default=DEFAULT_LOSS_DB_PER_KM)
    common.add_argument("--format", choices=("csv", "json"), help="default csv; json for simulate")
    common.add_argument("--out", metavar="FILE", help="write data here instead of stdout")
    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--grid-n", type=int, default=25, help="seed grid points in n")
    opt.add_argument("--grid-x0", type=int, default=21, help="seed grid points in x0")
    opt.add_argument("--n-min", type=float, default=1e-3)
    opt.add_argument("--n-max", type=float, default=1e3)
    opt.add_argument("--x0-sigmas", type=float, default=10.0,
                     help="x0 searched up to sqrt(eta n) + this many sigma")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("gain", parents=[common], help="secure key gain at fixed parameters")
    p.add_argument("--per-sent-pulse", action="store_true", help="apply a further 1/2 basis factor")
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("optimize", parents=[common, opt], help="maximize gain over (x0, n)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common, opt], help="tabulate gain or distance bound")
    p.add_argument("--variable", choices=SWEEP_VARIABLES, required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--no-optimize", action="store_true", help="use --n and --x0 as given")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("distance-bound", parents=[common], help="loss limit from teleportation attack")
    p.set_defaults(func=cmd_distance_bound)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo protocol run")
    p.add_argument("--pulses", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--density-check", action="store_true")
    p.add_argument("--bins", type=int, default=50)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "json" if args.command == "simulate" else "csv"
    try:
        if args.out:
            with open(args.out, "w", newline="") as fh:
                code = args.func(args, fh)
        else:
            code = args.func(args, sys.stdout)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, ArithmeticError) as exc:
        print(f"{parser.prog}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return code or 0


if __name__ == "__main__":
    sys.exit(main())

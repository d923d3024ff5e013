"""Command-line interface: ``tailfit estimate | simulate | variance``.

Exit codes: 0 success, 2 unreadable input, 3 numeric failure of the
estimator or of the limit matrix, 64 invalid flags or configuration.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .asymptotics import DEFAULT_PANELS, asymptotic_variance
from .errors import ConfigurationError, DomainError, NumericError, TailfitError
from .estimators import (
    RegressionConfig,
    Uniform,
    dedh,
    format_weight,
    hill,
    parse_weight,
    pickands,
    wls_estimate,
)
from .models import Hall, OrderedSample, StrictPareto
from .simulation import EstimatorSpec, SimulationPlan, standard_estimators, run_plan, write_report_csv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

DEFAULT_SEED = 20240601


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _weight(text: str):
    try:
        return parse_weight(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_regression_flags(p: argparse.ArgumentParser):
    p.add_argument("--a", type=float, default=0.001, help="lower percentile bound (default 0.001)")
    p.add_argument("--b", type=float, default=0.4, help="upper percentile bound (default 0.4)")
    p.add_argument("--weight", type=_weight, default="pow:0.002,1",
                   help="'uniform' or 'pow:c,k' for R(s)=c*s^k (default pow:0.002,1)")
    p.add_argument("--response", choices=["step", "jth-largest"], default="step",
                   help="order statistic used for Q_n(1-j/n): X_(n-j) (step) or X_(n-j+1)")


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--model", choices=["pareto", "hall"], default="pareto")
    p.add_argument("--d1", type=float, default=0.4)
    p.add_argument("--d2", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.01)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailfit", description="Tail index estimation toolkit")
    parser.add_argument("--version", action="version", version=f"tailfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="estimate the tail index of a data file")
    est.add_argument("input", help="one value per line, '#' comments allowed")
    est.add_argument("--method", required=True, choices=["wls", "ols", "hill", "pickands", "dedh"])
    est.add_argument("--k", type=int, default=None, help="number of top order statistics")
    est.add_argument("--ptilde", type=int, default=1)
    _add_regression_flags(est)

    sim = sub.add_parser("simulate", help="Monte Carlo study, CSV report")
    _add_model_flags(sim)
    sim.add_argument("--alphas", type=_float_list, required=True,
                     help="comma or space separated tail indices")
    sim.add_argument("--n", type=int, default=5000)
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--estimators", nargs="+", required=True,
                     help="tokens like wls:ptilde=1 ols:ptilde=2 hill:k=200, or 'standard'")
    sim.add_argument("--k", type=int, default=200, help="default k for baselines")
    _add_regression_flags(sim)
    sim.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sim.add_argument("--threads", type=int, default=None,
                     help="worker threads (default: TAILFIT_THREADS or all cores)")
    sim.add_argument("--fixture-sample", default=None,
                     help="use the values of this file as the sample of every replication")
    sim.add_argument("--out", default="-", help="output CSV path, '-' for stdout")

    var = sub.add_parser("variance", help="asymptotic variance of the WLS estimator")
    _add_model_flags(var)
    var.add_argument("--alpha", type=float, required=True)
    var.add_argument("--ptilde", type=int, default=1)
    _add_regression_flags(var)
    var.add_argument("--panels", type=int, default=DEFAULT_PANELS)
    return parser


def read_values(path: str) -> np.ndarray:
    """Read newline-delimited reals; blank and '#' lines are skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise OSError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise OSError(f"{path}: no data values")
    return np.asarray(values)


def _response(args) -> str:
    return args.response.replace("-", "_")


def _config(args, weight=None) -> RegressionConfig:
    return RegressionConfig(args.a, args.b, args.ptilde,
                            args.weight if weight is None else weight, _response(args))


def _emit(rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(rows)


def cmd_estimate(args, out) -> int:
    try:
        smp = OrderedSample(read_values(args.input))
    except (OSError, UnicodeDecodeError, DomainError) as exc:
        print(f"tailfit: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    method = args.method
    if method in ("wls", "ols"):
        config = _config(args, Uniform() if method == "ols" else None)
        fit = wls_estimate(smp, config)
        header = ["method", "n", "alpha_hat"] + [f"theta_{i}" for i in range(config.p_tilde + 1)]
        row = [method, smp.n, repr(fit.alpha_hat)] + [repr(float(t)) for t in fit.theta_hat]
    else:
        if args.k is None:
            raise UsageError(f"--k is required for --method {method}")
        fn = {"hill": hill, "pickands": pickands, "dedh": dedh}[method]
        try:
            value = fn(smp, args.k)
        except DomainError as exc:
            raise ConfigurationError(str(exc)) from None
        header = ["method", "n", "alpha_hat", "k"]
        row = [method, smp.n, repr(value), args.k]
    _emit([header, row], out)
    return EXIT_OK


def parse_estimator_token(token: str, args) -> list[EstimatorSpec]:
    """``name[:key=value...]``; keys ptilde, k, a, b separated by ':' ',' or ';'."""
    name, _, rest = token.partition(":")
    name = name.strip().lower()
    if name == "standard":
        return standard_estimators(args.k, args.a, args.b, weight=args.weight,
                                response=_response(args))
    opts = {}
    for item in rest.replace(";", ":").replace(",", ":").split(":"):
        if not item:
            continue
        key, eq, value = item.partition("=")
        if not eq or key not in ("ptilde", "k", "a", "b"):
            raise UsageError(f"bad estimator option {item!r} in {token!r}")
        opts[key] = value
    try:
        if name in ("hill", "pickands", "dedh"):
            return [EstimatorSpec(name, k=int(opts.get("k", args.k)))]
        if name in ("wls", "ols"):
            weight = Uniform() if name == "ols" else args.weight
            config = RegressionConfig(float(opts.get("a", args.a)), float(opts.get("b", args.b)),
                                      int(opts.get("ptilde", 1)), weight, _response(args))
            return [EstimatorSpec(name, config)]
    except ValueError as exc:
        raise UsageError(f"bad estimator {token!r}: {exc}") from None
    raise UsageError(f"unknown estimator {name!r}")


def cmd_simulate(args, out) -> int:
    specs = []
    for token in args.estimators:
        specs += parse_estimator_token(token, args)
    sampler = None
    n = args.n
    if args.fixture_sample is not None:
        try:
            fixture = OrderedSample(read_values(args.fixture_sample))
        except (OSError, UnicodeDecodeError, DomainError) as exc:
            print(f"tailfit: cannot read {args.fixture_sample}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        if fixture.n != n:
            raise ConfigurationError(f"fixture has {fixture.n} values but --n is {n}")
        sampler = lambda model, size, rng: fixture  # noqa: E731
    plan = SimulationPlan(args.model, tuple(args.alphas), n, args.reps, args.seed,
                          tuple(specs), args.d1, args.d2, args.beta, sampler=sampler)
    if args.threads is not None and args.threads < 0:
        raise ConfigurationError("--threads must be >= 0")
    # resolve all designs (and so all configuration errors) before any output
    for spec in plan.estimators:
        spec.check(plan.n)
    report = run_plan(plan, threads=args.threads)
    if args.out == "-":
        write_report_csv(report, out)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_report_csv(report, fh)
    return EXIT_OK


def cmd_variance(args, out) -> int:
    if args.model == "pareto":
        model = StrictPareto(args.alpha)
    else:
        model = Hall(args.alpha, args.d1, args.d2, args.beta)
    if args.panels < 1:
        raise ConfigurationError("--panels must be >= 1")
    config = _config(args)
    v = asymptotic_variance(model, config, args.panels)
    header = ["model", "alpha", "a", "b", "ptilde", "weight", "V", "V_over_alpha_sq"]
    row = [args.model, repr(model.alpha), repr(config.a), repr(config.b), config.p_tilde,
           format_weight(config.weight), repr(v), repr(v / model.alpha ** 2)]
    _emit([header, row], out)
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "simulate": cmd_simulate, "variance": cmd_variance}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"tailfit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, DomainError) as exc:
        print(f"tailfit: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"tailfit: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TailfitError as exc:
        print(f"tailfit: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point.

    sharpsa run configs/circle_psgd.toml --reps 5 --out /tmp/circle
    sharpsa check circle --condition d1
    sharpsa constants --kappa 1 --lam 0.5 --B 1 --F 3 --D 1.2 --E 0.8 --gamma 1 --a 1 --u 1
    sharpsa bench-list

Exit codes: 0 success, 1 bad configuration, 2 too many failed
replications, 3 I/O error.  ``SHARPSA_OUT`` sets the default output root.
"""

from __future__ import annotations

import argparse
import json
import sys

from .. import bounds
from ..algorithms import PsgdConfig
from ..core import PowerLaw
from ..problems import BENCHMARKS, make_problem
from .config import OUT_ENV, ConfigError, load_config
from .runner import FailureRateExceeded, OutputError, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_FAILURES, EXIT_IO = 0, 1, 2, 3


def _dump(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        master_seed=args.seed, replications=args.reps, iters=args.iters, output_dir=args.out, threads=args.threads
    )
    cfg.validate()
    try:
        problem = make_problem(cfg.problem, **cfg.problem_params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [problem_params] for {cfg.problem}: {exc}") from None
    report = run_experiment(cfg, problem=problem)
    fit = report.fit
    if fit is not None:
        print(f"{cfg.label}: slope {fit.slope:.4f} (r2 {fit.r2:.4f}, {fit.n_points} points), "
              f"{report.n_success}/{cfg.replications} reps, {report.wall_time:.1f}s -> {report.output_dir}")
    else:
        print(f"{cfg.label}: no fit ({report.fit_error}) -> {report.output_dir}")
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        problem = make_problem(args.problem)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    seed = 0 if args.seed is None else args.seed
    cond = args.condition
    if cond == "d1":
        report = bounds.check_sharpness(problem, rng=seed)
    elif cond == "d3":
        report = bounds.check_kw_bias(problem, rng=seed)
    else:
        config = PsgdConfig(PowerLaw(args.alpha, 1.0, 0.0), batch=args.batch)
        kappa = args.kappa if args.kappa is not None else (problem.kappa or 1.0) / 2.0
        if cond == "c1":
            report = bounds.check_drift(problem, config, kappa, args.B, rng=seed)
        else:
            report = bounds.check_increments(problem, config, kappa, rng=seed)
    _dump(report.to_dict())
    print(f"{report.condition} {'passed' if report.passed else 'failed'} on {args.problem}")
    return EXIT_OK


def cmd_constants(args) -> int:
    try:
        bc = bounds.bound_constants(args.kappa, args.lam, args.B, args.F, args.D, args.E, args.gamma, args.a, args.u)
    except bounds.InvalidRegime as exc:
        raise ConfigError(str(exc)) from None
    _dump(bc.to_dict())
    return EXIT_OK


def cmd_bench_list(args) -> int:
    for name in sorted(BENCHMARKS):
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sharpsa", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--reps", type=int)
    r.add_argument("--iters", type=int)
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<name> or runs/<name>)")
    r.add_argument("--threads", type=int)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="Monte Carlo check of one condition on a benchmark")
    c.add_argument("problem")
    c.add_argument("--condition", choices=("d1", "c1", "c2", "d3"), default="d1")
    c.add_argument("--seed", type=int)
    c.add_argument("--alpha", type=float, default=0.01, help="step size for c1/c2")
    c.add_argument("--batch", type=int, default=1)
    c.add_argument("--kappa", type=float, help="drift constant for c1/c2 (default half the declared one)")
    c.add_argument("--B", type=float, default=1.0, help="drift holds where f - f* >= alpha B")
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("constants", help="tail-bound constants for a power-law schedule")
    for name in ("kappa", "lam", "B", "F", "D", "E", "gamma", "a", "u"):
        k.add_argument(f"--{name}", type=float, required=True)
    k.set_defaults(func=cmd_constants)

    b = sub.add_parser("bench-list", help="list benchmark names")
    b.set_defaults(func=cmd_bench_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FailureRateExceeded as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    except OutputError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

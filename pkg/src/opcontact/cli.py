"""Command-line front end: configuration, seed management, result persistence.

Every output document embeds schema_version=1, the fully resolved
configuration and the master seed, so any result file can be regenerated
bit-exactly.  Exit codes: 0 success, 2 usage error, 3 budget exceeded,
4 bracketing failure, 1 other errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys

from . import estimator, mean_field, path_process, sir, walks
from .contact import SimOptions, check_self_duality, run_quenched, survival_probability
from .environment import ModelParams, QuenchedEnvironment
from .errors import BracketError, BudgetExceededError, DivergenceError
from .kernels import BACKEND

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_BRACKET = 4

SCHEMA_VERSION = 1


def _emit(text: str, out_path):
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _json_record(args, payload: dict) -> str:
    record = {
        "schema_version": SCHEMA_VERSION,
        "backend": BACKEND,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
    }
    record.update(payload)
    return json.dumps(record, indent=2, default=_jsonable)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_text(header, rows, args) -> str:
    buf = io.StringIO()
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    buf.write(f"# schema_version={SCHEMA_VERSION} "
              f"config={json.dumps(config, default=_jsonable)}\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _sim_options(args, **overrides) -> SimOptions:
    values = dict(
        box_radius=args.box_radius,
        horizon=args.horizon,
        direction=getattr(args, "direction", "forward"),
        rng_seed=getattr(args, "master_seed", 0),
        pop_cap=args.pop_cap,
        event_budget=args.event_budget,
        threads=args.threads,
    )
    values.update(overrides)
    return SimOptions(**values)


def _add_common(sub):
    sub.add_argument("--out", default=None, help="output path ('-' for stdout)")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--master-seed", dest="master_seed", type=int, default=0)
    sub.add_argument("--box-radius", dest="box_radius", type=int, default=20)
    sub.add_argument("--pop-cap", dest="pop_cap", type=int, default=200_000)
    sub.add_argument("--event-budget", dest="event_budget", type=int,
                     default=200_000_000)


def _cmd_simulate(args):
    params = ModelParams(d=args.d, p=args.p, lam=getattr(args, "lam"))
    opts = _sim_options(args)
    if args.env_seed is not None:
        env = QuenchedEnvironment(
            params=ModelParams(d=args.d, p=args.p), env_seed=args.env_seed
        )
        result = run_quenched(env, args.lam, [(0,) * args.d], opts)
        payload = {
            "mode": "quenched",
            "alive_at_horizon": result.alive_at_horizon,
            "extinction_time": result.extinction_time,
            "final_infected": sorted(result.final.infected),
            "boundary_hits": result.boundary_hits,
        }
    else:
        est = survival_probability(
            params, opts, args.replicas, mode="annealed", master_seed=args.master_seed
        )
        payload = {
            "mode": "annealed",
            "estimate": est.mean,
            "se": est.se,
            "replicas": est.replicas,
            "boundary_hits": est.boundary_hits,
            "truncated_runs": est.truncated_runs,
        }
    _emit(_json_record(args, payload), args.out)
    return EXIT_OK


def _cmd_zeta(args):
    params = ModelParams(d=args.d, p=args.p, lam=args.lam)
    opts = _sim_options(args)
    est = path_process.mean_zeta_origin(
        params, args.t, args.replicas, opts, master_seed=args.master_seed
    )
    payload = {
        "t": args.t,
        "mean": est.mean,
        "se": est.se,
        "analytic": path_process.analytic_mean_zeta(params, args.t),
        "replicas": est.replicas,
        "truncated_runs": est.truncated_runs,
    }
    _emit(_json_record(args, payload), args.out)
    return EXIT_OK


def _cmd_paths(args):
    params = ModelParams(d=args.d, p=args.p, lam=args.lam)
    res = sir.second_moment_bound(
        params, args.n, args.replicas, master_seed=args.master_seed
    )
    payload = {
        "n": args.n,
        "E_M": res.e_m,
        "E_M_se": res.e_m_se,
        "E_M2": res.e_m2,
        "E_M2_se": res.e_m2_se,
        "bound": res.bound,
        "direct": res.direct,
        "direct_se": res.direct_se,
        "expected_E_M": sir.expected_path_count(params, args.n),
        "fields": res.fields,
    }
    _emit(_json_record(args, payload), args.out)
    return EXIT_OK


def _cmd_walks(args):
    tail = walks.estimate_theta_tail(
        args.d, args.horizon_steps, args.replicas, master_seed=args.master_seed
    )
    payload = {
        "d": args.d,
        "N": args.horizon_steps,
        "theta_tail": tail.estimate,
        "theta_tail_se": tail.se,
        "C_hat": tail.c_hat,
        "theta_one": tail.theta_one,
        "replicas": tail.replicas,
    }
    if args.lam is not None:
        moment = walks.collision_moment(
            args.d, args.p, args.lam,
            [args.horizon_steps // 4, args.horizon_steps // 2, args.horizon_steps],
            args.replicas, master_seed=args.master_seed,
        )
        payload["moment"] = {
            "horizons": moment.horizons,
            "estimates": moment.estimates,
            "ses": moment.ses,
            "stabilized": moment.stabilized(),
        }
    _emit(_json_record(args, payload), args.out)
    return EXIT_OK


def _cmd_meanfield(args):
    if args.a is not None:
        a = args.a
    else:
        if args.lam is None:
            raise ValueError("either --a or all of --d/--p/--lambda are required")
        a = args.lam * args.d * args.p
    rows = [
        (t, f) for t, f in mean_field.trajectory(a, args.t_max, args.dt)
    ]
    _emit(_csv_text(["t", "f"], rows, args), args.out)
    return EXIT_OK


def _cmd_selfdual(args):
    params = ModelParams(d=args.d, p=args.p, lam=args.lam)
    opts = _sim_options(args)
    forward, dual, combined = check_self_duality(
        params, args.t, args.replicas, opts, master_seed=args.master_seed
    )
    payload = {
        "t": args.t,
        "forward": {"mean": forward.mean, "se": forward.se},
        "dual": {"mean": dual.mean, "se": dual.se},
        "difference": forward.mean - dual.mean,
        "combined_se": combined,
        "replicas": args.replicas,
    }
    _emit(_json_record(args, payload), args.out)
    return EXIT_OK


def _cmd_estimate(args):
    opts = _sim_options(args)
    quenched_env = None
    if args.mode == "quenched":
        quenched_env = QuenchedEnvironment(
            params=ModelParams(d=args.d, p=args.p), env_seed=args.env_seed or 0
        )
    bracket = ((args.bracket_lo, args.bracket_hi)
               if args.bracket_lo is not None else estimator.default_bracket(args.d, args.p))
    est = estimator.bisect_lambda_c(
        args.d, args.p, bracket, args.eps, args.tol, opts, args.replicas,
        mode=args.mode, master_seed=args.master_seed, quenched_env=quenched_env,
    )
    _emit(_json_record(args, {"estimate": est}), args.out)
    return EXIT_OK


def _cmd_sweep(args):
    opts = _sim_options(args)
    lam_grid = [args.lam_lo + i * (args.lam_hi - args.lam_lo) / (args.points - 1)
                for i in range(args.points)]
    quenched_env = None
    if args.mode == "quenched":
        quenched_env = QuenchedEnvironment(
            params=ModelParams(d=args.d, p=args.p), env_seed=args.env_seed or 0
        )
    record = estimator.sweep(
        args.d, args.p, lam_grid, opts, args.replicas, mode=args.mode,
        master_seed=args.master_seed, quenched_env=quenched_env,
    )
    for warning in record.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    rows = [
        (lam, est.mean, est.se, est.replicas, est.boundary_hits, est.truncated_runs)
        for lam, est in zip(record.lam_grid, record.estimates)
    ]
    header = ["lambda", "survival", "se", "replicas", "boundary_hits", "truncated_runs"]
    _emit(_csv_text(header, rows, args), args.out)
    return EXIT_OK


def _cmd_scaling(args):
    opts = _sim_options(args)
    rows = estimator.scaling_table(
        args.p, args.d_list, opts, args.replicas, eps=args.eps,
        c_hat=args.c_hat, master_seed=args.master_seed,
    )
    header = ["d", "lambda_hat", "ci_lo", "ci_hi", "dp_lambda",
              "lower_bound", "upper_bound", "error"]
    table = [
        (r.d, r.lambda_hat, None if r.ci is None else r.ci[0],
         None if r.ci is None else r.ci[1], r.dp_lambda,
         r.lower_bound, r.upper_bound, r.error)
        for r in rows
    ]
    _emit(_csv_text(header, table, args), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opcontact",
        description="Contact-process experiments on oriented percolation clusters",
    )
    parser.add_argument("--config", default=None,
                        help="JSON file of defaults; explicit flags override")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("simulate", help="single quenched run or annealed survival batch")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--lambda", dest="lam", type=float, required=True)
    sub.add_argument("--horizon", type=float, default=10.0)
    sub.add_argument("--direction", choices=["forward", "dual"], default="forward")
    sub.add_argument("--replicas", type=int, default=1000)
    sub.add_argument("--env-seed", dest="env_seed", type=int, default=None,
                     help="fix the environment (quenched single run)")
    _add_common(sub)
    sub.set_defaults(func=_cmd_simulate)

    sub = subs.add_parser("zeta", help="integer path-process origin mean vs the closed form")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--lambda", dest="lam", type=float, required=True)
    sub.add_argument("--t", type=float, required=True)
    sub.add_argument("--replicas", type=int, default=10_000)
    sub.add_argument("--horizon", type=float, default=10.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_zeta)

    sub = subs.add_parser("paths", help="infection-path first/second moments and the survival bound")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--lambda", dest="lam", type=float, required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--replicas", type=int, default=10_000)
    sub.add_argument("--horizon", type=float, default=10.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_paths)

    sub = subs.add_parser("walks", help="walk-pair collision statistics and the tail constant")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--p", type=float, default=0.5)
    sub.add_argument("--lambda", dest="lam", type=float, default=None)
    sub.add_argument("--steps", dest="horizon_steps", type=int, default=1600)
    sub.add_argument("--replicas", type=int, default=100_000)
    sub.add_argument("--horizon", type=float, default=10.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_walks)

    sub = subs.add_parser("meanfield", help="mean-field occupation trajectory as CSV")
    sub.add_argument("--a", type=float, default=None)
    sub.add_argument("--d", type=int, default=None)
    sub.add_argument("--p", type=float, default=None)
    sub.add_argument("--lambda", dest="lam", type=float, default=None)
    sub.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    sub.add_argument("--dt", type=float, default=0.1)
    sub.add_argument("--horizon", type=float, default=10.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_meanfield)

    sub = subs.add_parser("selfdual", help="forward occupation vs dual survival at one time")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--lambda", dest="lam", type=float, required=True)
    sub.add_argument("--t", type=float, required=True)
    sub.add_argument("--replicas", type=int, default=100_000)
    sub.add_argument("--horizon", type=float, default=10.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_selfdual)

    sub = subs.add_parser("estimate", help="bisect the pseudo-critical infection rate")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--mode", choices=["annealed", "quenched"], default="annealed")
    sub.add_argument("--env-seed", dest="env_seed", type=int, default=None)
    sub.add_argument("--eps", type=float, default=estimator.DEFAULT_EPS)
    sub.add_argument("--tol", type=float, default=0.05)
    sub.add_argument("--bracket-lo", dest="bracket_lo", type=float, default=None)
    sub.add_argument("--bracket-hi", dest="bracket_hi", type=float, default=None)
    sub.add_argument("--replicas", type=int, default=2000)
    sub.add_argument("--horizon", type=float, default=30.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_estimate)

    sub = subs.add_parser("sweep", help="survival curve over a lambda grid as CSV")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--lam-lo", dest="lam_lo", type=float, required=True)
    sub.add_argument("--lam-hi", dest="lam_hi", type=float, required=True)
    sub.add_argument("--points", type=int, default=9)
    sub.add_argument("--mode", choices=["annealed", "quenched"], default="annealed")
    sub.add_argument("--env-seed", dest="env_seed", type=int, default=None)
    sub.add_argument("--replicas", type=int, default=2000)
    sub.add_argument("--horizon", type=float, default=30.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_sweep)

    sub = subs.add_parser("scaling", help="pseudo-critical rate per dimension with bound columns")
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--d-list", dest="d_list", type=int, nargs="+", required=True)
    sub.add_argument("--eps", type=float, default=estimator.DEFAULT_EPS)
    sub.add_argument("--c-hat", dest="c_hat", type=float, default=0.0)
    sub.add_argument("--replicas", type=int, default=2000)
    sub.add_argument("--horizon", type=float, default=30.0)
    _add_common(sub)
    sub.set_defaults(func=_cmd_scaling)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv):
    """Load --config JSON as subcommand defaults; explicit flags still win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        parser.error("--config requires a path")
    argv = argv[:i] + argv[i + 2:]
    with open(path) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        parser.error("config file must contain a JSON object")
    extra = []
    present = set(argv)
    for key, value in config.items():
        flag = "--" + key.replace("_", "-")
        if flag in present:
            continue
        if isinstance(value, bool):
            parser.error(f"boolean config key {key!r} not supported; use flags")
        elif isinstance(value, list):
            extra.append(flag)
            extra.extend(str(v) for v in value)
        else:
            extra.append(flag)
            extra.append(str(value))
    return argv + extra


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except BudgetExceededError as exc:
        print(json.dumps({"error": "budget", "message": str(exc)}), file=sys.stderr)
        return EXIT_BUDGET
    except BracketError as exc:
        print(json.dumps({
            "error": "bracket", "message": str(exc),
            "survival_lo": exc.survival_lo, "survival_hi": exc.survival_hi,
        }), file=sys.stderr)
        return EXIT_BRACKET
    except (ValueError, DivergenceError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "invalid", "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

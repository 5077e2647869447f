"""
Command-line front end.

    pricequery run --setting mhr-range --dist lb-mhr-f0 --eps 0.1 --delta 0.1
    pricequery verify --instance lb-regular-pair --H 20 --eps 0.1
    pricequery sweep --setting regular-range --dist trunc-exp --param eps \
        --values 0.1,0.05,0.025
    pricequery calibrate --setting mhr-range --dist lb-mhr-f0 --target 0.9

Exit codes: 0 success, 1 failed verification facts, 2 usage or
configuration error, 3 internal invariant violated.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from pricequery import harness
from pricequery.distributions import registry
from pricequery.distributions.families import DistributionWarning
from pricequery.distributions.hard_instances import (
    HardInstanceWarning,
    verify_instance,
)
from pricequery.harness import ExperimentConfig, HarnessWarning
from pricequery.io import IO, ConfigWarning, load_config
from pricequery.learners.estimation import EstimationWarning
from pricequery.learners.grid_search import GridSearchWarning
from pricequery.learners.instantiation import SETTINGS, InstantiationWarning
from pricequery.learners.unified_search import (
    InternalInvariantWarning,
    SearchParamsWarning,
)
from pricequery.oracle import OracleWarning

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3

CONFIG_ERRORS = (
    ConfigWarning,
    DistributionWarning,
    HardInstanceWarning,
    HarnessWarning,
    SearchParamsWarning,
    InstantiationWarning,
    GridSearchWarning,
    EstimationWarning,
)
# a trial exceeding its oracle budget breaks the query bound
INTERNAL_ERRORS = (InternalInvariantWarning, OracleWarning)


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"{text} is not a comma separated list of numbers"
        )


def _add_experiment_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--setting",
        dest="setting",
        action="store",
        type=str,
        required=True,
        choices=sorted(SETTINGS),
        help="Hint model and distribution class.",
    )
    parser.add_argument(
        "--dist",
        dest="dist",
        action="store",
        type=str,
        required=True,
        help="Builtin distribution name or path to a JSON document.",
    )
    parser.add_argument(
        "--eps",
        dest="eps",
        action="store",
        type=float,
        default=0.1,
        help="Accuracy parameter.",
    )
    parser.add_argument(
        "--delta",
        dest="delta",
        action="store",
        type=float,
        default=0.1,
        help="Failure probability.",
    )
    parser.add_argument(
        "--trials",
        dest="trials",
        action="store",
        type=int,
        default=None,
        help="Number of independent trials.",
    )
    parser.add_argument(
        "--seed",
        dest="seed",
        action="store",
        type=int,
        default=None,
        help="Master seed.",
    )
    parser.add_argument(
        "--C",
        dest="C",
        action="store",
        type=float,
        default=None,
        help="Constant of the estimation budgets.",
    )
    parser.add_argument(
        "--H",
        dest="H",
        action="store",
        type=float,
        default=None,
        help="Value-range hint; defaults to the top of the support.",
    )
    parser.add_argument(
        "--budget-mult",
        dest="budget_mult",
        action="store",
        type=float,
        default=None,
        help="Oracle budget in units of the theoretical query bound.",
    )
    parser.add_argument(
        "--jobs",
        dest="jobs",
        action="store",
        type=int,
        default=None,
        help="Worker processes; -1 uses all cores.",
    )
    parser.add_argument(
        "--out",
        dest="out",
        action="store",
        type=str,
        default=".",
        help="Folder in which reports will be saved.",
    )


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        dest="config",
        action="store",
        type=str,
        default=None,
        help="YAML file merged over the packaged defaults.",
    )
    parser.add_argument(
        "--verbose",
        dest="verbose",
        action="store_true",
        help="Log debug messages.",
    )


def get_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="pricequery",
        description="Pricing-query learners for revenue maximization.",
    )
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    run = sub.add_parser("run", help="Run repeated trials of one setting.")
    _add_experiment_args(run)
    run.add_argument(
        "--trace",
        dest="trace",
        action="store_true",
        help="Also save the round-by-round trace of every trial.",
    )
    _add_common_args(run)

    verify = sub.add_parser("verify", help="Check a hard instance.")
    verify.add_argument(
        "--instance",
        dest="instance",
        action="store",
        type=str,
        required=True,
        choices=["lb-regular-pair", "lb-mhr-pair", "lb-general"],
        help="Hard instance to verify.",
    )
    verify.add_argument(
        "--H",
        dest="H",
        action="store",
        type=float,
        default=20.0,
        help="Top of the value range.",
    )
    verify.add_argument(
        "--eps",
        dest="eps",
        action="store",
        type=float,
        default=0.1,
        help="Accuracy parameter of the construction.",
    )
    verify.add_argument(
        "--grid",
        dest="grid",
        action="store",
        type=int,
        default=None,
        help="Grid points of the class checkers.",
    )
    verify.add_argument(
        "--tol",
        dest="tol",
        action="store",
        type=float,
        default=None,
        help="Tolerance of the class checkers.",
    )
    _add_common_args(verify)

    sweep = sub.add_parser("sweep", help="Sweep eps, H or delta.")
    _add_experiment_args(sweep)
    sweep.add_argument(
        "--param",
        dest="param",
        action="store",
        type=str,
        required=True,
        choices=list(harness.SWEEP_PARAMETERS),
        help="Parameter to sweep.",
    )
    sweep.add_argument(
        "--values",
        dest="values",
        action="store",
        type=_float_list,
        required=True,
        help="Comma separated parameter values.",
    )
    _add_common_args(sweep)

    calibrate = sub.add_parser("calibrate", help="Calibrate the constant C.")
    _add_experiment_args(calibrate)
    calibrate.add_argument(
        "--target",
        dest="target",
        action="store",
        type=float,
        default=0.9,
        help="Required lower Wilson bound of the success rate.",
    )
    calibrate.add_argument(
        "--ladder",
        dest="ladder",
        action="store",
        type=_float_list,
        default=None,
        help="Comma separated candidate values of C.",
    )
    calibrate.add_argument(
        "--full-ladder",
        dest="full_ladder",
        action="store_true",
        help="Evaluate every rung instead of bisecting.",
    )
    _add_common_args(calibrate)

    return parser.parse_args(argv)


def _pick(value, default):
    return default if value is None else value


def experiment_config(
    args: argparse.Namespace, config: dict
) -> ExperimentConfig:
    """Flags over the YAML defaults."""
    defaults = config["harness"]
    doc = registry.resolve(args.dist, config["builtin_distributions"])
    return ExperimentConfig(
        setting=args.setting,
        distribution=doc,
        eps=args.eps,
        delta=args.delta,
        C=_pick(args.C, config["estimation"]["C"]),
        trials=_pick(args.trials, defaults["trials"]),
        seed=_pick(args.seed, defaults["seed"]),
        oracle_budget_multiplier=_pick(
            args.budget_mult, defaults["budget_multiplier"]
        ),
        H=args.H,
        jobs=_pick(args.jobs, defaults["jobs"]),
        keep_traces=getattr(args, "trace", False),
        checker_grid_points=config["checkers"]["grid_points"],
        checker_tol=config["checkers"]["tol"],
        opt_grid_points=config["brute_force"]["grid_points"],
    )


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args: argparse.Namespace, config: dict) -> int:
    cfg = experiment_config(args, config)
    report = harness.run_trials(cfg)
    out = _out_dir(args)
    data = report.to_dict()
    data["schema_version"] = config["reports"]["schema_version"]
    traces = []
    for trial in data["per_trial"] or []:
        if "trace" in trial:
            traces.append({"trial": trial["trial"], **trial.pop("trace")})
    IO.save_json(data, out / "report.json")
    IO.save_dataFrame(pd.DataFrame([report.summary_row()]), out / "report.csv")
    if args.trace:
        IO.save_json(
            {
                "schema_version": data["schema_version"],
                "setting": report.setting,
                "traces": traces,
            },
            out / "trace.json",
        )
    print(
        f"{report.setting}: success rate {report.success_rate:.3f} "
        f"({report.successes}/{report.trials}), "
        f"mean queries {report.queries['mean']:.6g}"
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: dict) -> int:
    table = verify_instance(
        args.instance,
        H=args.H,
        eps=args.eps,
        grid_points=_pick(args.grid, config["checkers"]["grid_points"]),
        tol=_pick(args.tol, config["checkers"]["tol"]),
        separation_grid_points=config["separation"]["grid_points"],
    )
    with pd.option_context("display.width", 200, "display.max_rows", None):
        print(table.to_string(index=False))
    passed = bool(table["passed"].all())
    print(f"{args.instance}: {'pass' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_FAILED


def cmd_sweep(args: argparse.Namespace, config: dict) -> int:
    cfg = experiment_config(args, config)
    reports = harness.sweep(cfg, args.param, args.values)
    df = harness.sweep_frame(reports, args.param, args.values)
    IO.save_dataFrame(df, _out_dir(args) / "sweep.csv")
    if len(df) > 1:
        print(f"log-log slope vs {args.param}: {df['loglog_slope'].iloc[0]:.3f}")
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace, config: dict) -> int:
    cfg = experiment_config(args, config)
    result = harness.calibrate_C(
        cfg,
        args.target,
        ladder=_pick(args.ladder, config["calibration"]["ladder"]),
        full_ladder=args.full_ladder or config["calibration"]["full_ladder"],
    )
    table = result.table.assign(
        schema_version=config["reports"]["schema_version"]
    )
    IO.save_dataFrame(table, _out_dir(args) / "calibration.csv")
    print(f"C* = {result.C_star} for target {args.target}")
    if result.monotone is False:
        print("success rate is not monotone in C over the ladder")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = get_args(argv)
    except SystemExit as err:
        return EXIT_CONFIG if err.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except CONFIG_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except INTERNAL_ERRORS as err:
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

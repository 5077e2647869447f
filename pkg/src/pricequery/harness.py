"""
Monte-Carlo experiments: repeated independently seeded trials of one
setting, success judged against the brute-force optimum, query counts
against the theoretical bound, parameter sweeps and calibration of C.

Trial i of an experiment with master seed s draws everything (hint and
queries) from np.random.default_rng(SeedSequence([s, i])), so results do
not depend on the number of workers.
"""
import logging
import math
import multiprocessing
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from pricequery.distributions import checkers, registry
from pricequery.distributions.families import Distribution
from pricequery.learners import grid_search, unified_search
from pricequery.learners.instantiation import (
    InstantiationWarning,
    Setting,
    get_setting,
)
from pricequery.oracle import PricingOracle
from pricequery.utils.statistics import loglog_slope, wilson_interval

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SWEEP_PARAMETERS = ("eps", "H", "delta")
DEFAULT_LADDER = (1, 2, 5, 10, 20, 50)

# store available nr. of cpus for parallel computation
ncpus_available = multiprocessing.cpu_count()


class HarnessWarning(BaseException):
    pass


@dataclass
class ExperimentConfig:
    """
    Attributes:
        setting: instantiation label, see learners.instantiation.SETTINGS
        distribution: JSON document of the buyer distribution
        eps, delta: accuracy and failure parameters
        C: constant of the budget formulas
        trials: number of independent trials
        seed: master seed
        success_factor: a trial succeeds iff Rev(output) >= factor * Opt;
            defaults to the guarantee of the setting
        oracle_budget_multiplier: oracle budget in units of the
            theoretical query bound
        H: value-range hint; defaults to the top of the support
        jobs: worker processes, -1 for all cpus
    """

    setting: str
    distribution: Dict[str, Any]
    eps: float
    delta: float
    C: float = 20.0
    trials: int = 200
    seed: int = 7
    success_factor: Optional[float] = None
    oracle_budget_multiplier: float = 10.0
    H: Optional[float] = None
    jobs: int = 1
    keep_per_trial: bool = True
    keep_traces: bool = False
    check_class: bool = True
    checker_grid_points: int = 10 ** 4
    checker_tol: float = 1e-6
    opt_grid_points: int = 10 ** 5

    def __post_init__(self):
        try:
            get_setting(self.setting)
        except InstantiationWarning as err:
            raise HarnessWarning(str(err))
        if self.trials < 1:
            raise HarnessWarning(f"trials={self.trials} must be at least 1")
        if not 0 <= self.factor < 1:
            raise HarnessWarning(
                f"success_factor={self.factor} must lie in [0, 1)"
            )
        if self.jobs == 0 or self.jobs < -1:
            raise HarnessWarning(
                f"jobs={self.jobs} is not valid. Please enter a value "
                ">0 for jobs or -1 to use all available cores."
            )
        if self.oracle_budget_multiplier < 1:
            raise HarnessWarning("oracle_budget_multiplier must be >= 1")

    @property
    def factor(self) -> float:
        if self.success_factor is not None:
            return self.success_factor
        return max(0.0, get_setting(self.setting).guarantee_factor(self.eps))

    @property
    def ncpus(self) -> int:
        return ncpus_available if self.jobs == -1 else self.jobs

    def to_dict(self) -> dict:
        out = asdict(self)
        out["success_factor"] = self.factor
        return out


@dataclass
class TrialReport:
    setting: str
    successes: int
    trials: int
    success_rate: float
    wilson_ci_95: Tuple[float, float]
    queries: Dict[str, float]
    theoretical_query_bound: int
    opt_price: float
    opt_revenue: float
    success_factor: float
    max_rounds: int
    round_bound: Optional[int]
    config: Dict[str, Any] = field(default_factory=dict)
    per_trial: Optional[List[Dict[str, Any]]] = None
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        out = asdict(self)
        out["wilson_ci_95"] = list(self.wilson_ci_95)
        return out

    def summary_row(self) -> dict:
        """Flat row for the CSV hand-off."""
        return {
            "schema_version": self.schema_version,
            "setting": self.setting,
            "eps": self.config.get("eps"),
            "delta": self.config.get("delta"),
            "H": self.config.get("H"),
            "C": self.config.get("C"),
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "wilson_lo": self.wilson_ci_95[0],
            "wilson_hi": self.wilson_ci_95[1],
            "queries_min": self.queries["min"],
            "queries_mean": self.queries["mean"],
            "queries_max": self.queries["max"],
            "theoretical_query_bound": self.theoretical_query_bound,
            "opt_price": self.opt_price,
            "opt_revenue": self.opt_revenue,
            "success_factor": self.success_factor,
            "max_rounds": self.max_rounds,
            "round_bound": self.round_bound,
        }

    def per_trial_frame(self) -> pd.DataFrame:
        rows = [
            {k: v for k, v in t.items() if k != "trace"}
            for t in (self.per_trial or [])
        ]
        return pd.DataFrame(rows)


@dataclass
class CalibrationResult:
    C_star: Optional[float]
    target: float
    table: pd.DataFrame
    monotone: Optional[bool] = None


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def check_distribution(
    d: Distribution, setting: Setting, H: float, cfg: ExperimentConfig
) -> None:
    """
    Raises:
        HarnessWarning: d violates the value range or the class the
            setting needs.
    """
    if not setting.uses_hint and not (
        d.support_lo >= 1 - 1e-12 and d.support_hi <= H * (1 + 1e-12)
    ):
        raise HarnessWarning(
            f"support [{d.support_lo:g}, {d.support_hi:g}] is not inside "
            f"the value range [1, {H:g}]"
        )
    if setting.requires == "regular":
        result = checkers.check_regular(
            d, cfg.checker_grid_points, cfg.checker_tol
        )
    elif setting.requires == "mhr":
        result = checkers.check_mhr(
            d, cfg.checker_grid_points, cfg.checker_tol
        )
    else:
        return
    if not result:
        raise HarnessWarning(
            f"{setting.label} needs a {setting.requires} distribution; "
            f"check failed with {result.violation}"
        )


def _run_trial(
    cfg: ExperimentConfig,
    setting: Setting,
    d: Distribution,
    H: float,
    opt_revenue: float,
    trial: int,
) -> Dict[str, Any]:
    oracle = PricingOracle(d, trial_rng(cfg.seed, trial))
    hint = None
    trace = None
    if setting.build is None:
        bound = grid_search.query_bound(H, cfg.eps, cfg.delta)
        oracle.budget = math.ceil(cfg.oracle_budget_multiplier * bound)
        price = grid_search.run_general(H, cfg.eps, cfg.delta, oracle)
        rounds, r_bound = 0, None
    else:
        if setting.uses_hint:
            hint = oracle.draw_hint_sample()
            params = setting.build(hint, cfg.eps, cfg.delta, cfg.C)
        else:
            params = setting.build(H, cfg.eps, cfg.delta, cfg.C)
        bound = unified_search.query_bound(params)
        oracle.budget = math.ceil(cfg.oracle_budget_multiplier * bound)
        price, trace = unified_search.run(params, oracle)
        rounds, r_bound = trace.n_rounds, trace.round_bound
    revenue = float(d.revenue(price))
    out = {
        "trial": trial,
        "output_price": price,
        "achieved_revenue": revenue,
        "queries": oracle.ledger.total,
        "success": bool(revenue >= cfg.factor * opt_revenue * (1 - 1e-12)),
        "rounds": rounds,
        "round_bound": r_bound,
        "query_bound": bound,
        "hint": hint,
    }
    if cfg.keep_traces and trace is not None:
        out["trace"] = trace.to_dict()
    return out


def run_trials(cfg: ExperimentConfig) -> TrialReport:
    """
    Run cfg.trials independent trials and aggregate them.

    Raises:
        HarnessWarning: the distribution fails the class check of the
            setting (unless cfg.check_class is off).
    """
    setting = get_setting(cfg.setting)
    d = registry.from_dict(cfg.distribution)
    H = float(cfg.H) if cfg.H is not None else d.support_hi
    if cfg.check_class:
        check_distribution(d, setting, H, cfg)
    opt = checkers.brute_force_opt(d, cfg.opt_grid_points)

    logger.info(
        f"Run {cfg.trials} trials of {cfg.setting} (eps={cfg.eps}, "
        f"delta={cfg.delta}, C={cfg.C}) with {cfg.ncpus} cpus"
    )
    if cfg.ncpus == 1:
        results = [
            _run_trial(cfg, setting, d, H, opt.opt_revenue, i)
            for i in range(cfg.trials)
        ]
    else:
        results = Parallel(n_jobs=cfg.ncpus)(
            delayed(_run_trial)(cfg, setting, d, H, opt.opt_revenue, i)
            for i in range(cfg.trials)
        )

    successes = sum(r["success"] for r in results)
    queries = np.array([r["queries"] for r in results])
    bounds = [r["round_bound"] for r in results if r["round_bound"]]
    config = cfg.to_dict()
    config["H"] = H
    report = TrialReport(
        setting=cfg.setting,
        successes=int(successes),
        trials=cfg.trials,
        success_rate=successes / cfg.trials,
        wilson_ci_95=wilson_interval(successes, cfg.trials, 0.95),
        queries={
            "min": int(queries.min()),
            "mean": float(queries.mean()),
            "max": int(queries.max()),
        },
        theoretical_query_bound=int(max(r["query_bound"] for r in results)),
        opt_price=opt.opt_price,
        opt_revenue=opt.opt_revenue,
        success_factor=cfg.factor,
        max_rounds=int(max(r["rounds"] for r in results)),
        round_bound=int(min(bounds)) if bounds else None,
        config=config,
        per_trial=results if cfg.keep_per_trial else None,
    )
    logger.info(
        f"success rate {report.success_rate:.3f} "
        f"(95% CI {report.wilson_ci_95[0]:.3f}-{report.wilson_ci_95[1]:.3f}), "
        f"mean queries {report.queries['mean']:.4g}"
    )
    return report


def _with_parameter(
    cfg: ExperimentConfig, parameter: str, value: float
) -> ExperimentConfig:
    if parameter != "H":
        return replace(cfg, **{parameter: value})
    doc = {
        "family": cfg.distribution["family"],
        "params": dict(cfg.distribution.get("params", {})),
    }
    if "H" in doc["params"]:
        doc["params"]["H"] = value
    return replace(cfg, H=value, distribution=doc)


def scaling_slope(
    parameter: str, values: Sequence[float], mean_queries: Sequence[float]
) -> float:
    """
    Log-log slope of mean queries against 1/eps, H or 1/delta.
    """
    x = np.asarray(values, dtype=float)
    if parameter in ("eps", "delta"):
        x = 1 / x
    return loglog_slope(x, mean_queries)


def sweep(
    base_cfg: ExperimentConfig, parameter: str, values: Sequence[float]
) -> List[TrialReport]:
    """
    One report per value of parameter (eps, H or delta). Sweeping H also
    rescales the distribution when its document has an H parameter.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise HarnessWarning(
            f"cannot sweep {parameter}; choose from {SWEEP_PARAMETERS}"
        )
    reports = [
        run_trials(_with_parameter(base_cfg, parameter, v)) for v in values
    ]
    if len(reports) > 1:
        slope = scaling_slope(
            parameter, values, [r.queries["mean"] for r in reports]
        )
        logger.info(f"log-log slope of mean queries vs {parameter}: {slope:.3f}")
    return reports


def sweep_frame(
    reports: List[TrialReport], parameter: str, values: Sequence[float]
) -> pd.DataFrame:
    """Summary rows of a sweep with the fitted scaling slope."""
    df = pd.DataFrame([r.summary_row() for r in reports])
    if len(df) == 0:
        return df
    df.insert(0, "value", list(values))
    df.insert(0, "parameter", parameter)
    df["loglog_slope"] = scaling_slope(
        parameter, values, df["queries_mean"].values
    )
    return df


def calibrate_C(
    cfg: ExperimentConfig,
    target: float,
    ladder: Sequence[float] = DEFAULT_LADDER,
    full_ladder: bool = False,
    confidence: float = 0.95,
) -> CalibrationResult:
    """
    Smallest C of the ladder whose Wilson lower bound on the success rate
    reaches target. Bisects over the ladder, which assumes the success
    rate grows with C; full_ladder runs every rung instead and audits that
    assumption.
    """
    ladder = sorted(ladder)
    if len(ladder) == 0:
        raise HarnessWarning("the C ladder is empty")
    evaluated: Dict[int, dict] = {}

    def meets(idx: int) -> bool:
        if idx not in evaluated:
            report = run_trials(replace(cfg, C=float(ladder[idx])))
            lo, hi = wilson_interval(
                report.successes, report.trials, confidence
            )
            evaluated[idx] = {
                "C": float(ladder[idx]),
                "success_rate": report.success_rate,
                "wilson_lo": lo,
                "wilson_hi": hi,
                "queries_mean": report.queries["mean"],
                "meets_target": bool(lo >= target),
            }
        return evaluated[idx]["meets_target"]

    C_star = None
    monotone = None
    if full_ladder:
        hits = [i for i in range(len(ladder)) if meets(i)]
        C_star = float(ladder[hits[0]]) if hits else None
        rows = [evaluated[i] for i in range(len(ladder))]
        monotone = all(
            later["wilson_hi"] >= earlier["wilson_lo"]
            for earlier, later in zip(rows[:-1], rows[1:])
        )
    else:
        lo, hi = 0, len(ladder) - 1
        if meets(hi):
            while lo < hi:
                mid = (lo + hi) // 2
                if meets(mid):
                    hi = mid
                else:
                    lo = mid + 1
            C_star = float(ladder[lo])
    table = pd.DataFrame([evaluated[i] for i in sorted(evaluated)])
    logger.info(f"calibrated C = {C_star} for target {target}")
    return CalibrationResult(
        C_star=C_star, target=target, table=table, monotone=monotone
    )

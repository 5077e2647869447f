"""
Ternary-search pricing learner for regular and MHR distributions.

The search runs on the geometric grid {l (1+eps)^k <= r}. While at least
20 candidates remain it queries two pivots: a cheap sale-rate check at the
upper pivot prunes prices that sell too rarely, otherwise the revenues at
both pivots are compared and a fifth to a half of the range is dropped.
The survivors and all compared pivots are re-estimated at the end and the
empirical best is returned.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from pricequery.learners.estimation import (
    EstimateBudgets,
    estimate_quantile,
    estimate_revenue,
    quantile_queries,
    revenue_queries,
)
from pricequery.oracle import PricingOracle

logger = logging.getLogger(__name__)

MIN_LOOP_SIZE = 20
PIVOT_A, PIVOT_B = 0.2, 0.5
WINDOW_A, WINDOW_B = 0.3, 0.6
QUANTILE_CUT = 0.75
GRID_RTOL = 1e-12


class SearchParamsWarning(BaseException):
    pass


class InternalInvariantWarning(BaseException):
    """Raised when a guarantee of the search is broken at runtime."""

    pass


@dataclass(frozen=True)
class SearchParams:
    """
    Attributes:
        ell: lowest candidate price
        r: highest candidate price
        eps: multiplicative accuracy, (0, 0.1] for the guarantee
        delta: failure probability
        gamma: sale-probability floor of the searched prices
        C: constant of the budget formulas
    """

    ell: float
    r: float
    eps: float
    delta: float
    gamma: float
    C: float = 20.0

    def __post_init__(self):
        if not (np.isfinite(self.ell) and np.isfinite(self.r)):
            raise SearchParamsWarning("ell and r must be finite")
        if not 0 < self.ell <= self.r:
            raise SearchParamsWarning(
                f"need 0 < ell <= r, got ell={self.ell}, r={self.r}"
            )
        if not 0 < self.eps < 1:
            raise SearchParamsWarning(f"eps={self.eps} must lie in (0, 1)")
        if not 0 < self.delta <= 1:
            raise SearchParamsWarning(f"delta={self.delta} not in (0, 1]")
        if not 0 < self.gamma <= 1:
            raise SearchParamsWarning(f"gamma={self.gamma} not in (0, 1]")
        if not self.C > 0:
            raise SearchParamsWarning(f"C={self.C} must be positive")
        if self.eps > 0.1:
            logger.warning(
                f"eps={self.eps} > 0.1: the pivot windows are no longer "
                "guaranteed and are checked at runtime"
            )

    @property
    def R_tilde(self) -> float:
        """22 ln^2(r/l) + 44 ln(r/l) ln(1/eps) + 66 ln(1/eps)"""
        span = math.log(self.r / self.ell)
        inv = math.log(1 / self.eps)
        return 22 * span ** 2 + 44 * span * inv + 66 * inv

    @property
    def budgets(self) -> EstimateBudgets:
        return EstimateBudgets(
            C=self.C,
            R_tilde=self.R_tilde,
            delta=self.delta,
            gamma=self.gamma,
            eps=self.eps,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RoundRecord:
    i: int
    ell_i: float
    r_i: float
    size: int
    a: float
    b: float
    q_hat_b: float
    decision: str
    size_next: int
    rev_a: Optional[float] = None
    rev_b: Optional[float] = None


@dataclass
class RunTrace:
    grid: List[float]
    round_bound: int
    rounds: List[RoundRecord] = field(default_factory=list)
    s_can: List[float] = field(default_factory=list)
    final_estimates: Dict[float, float] = field(default_factory=dict)
    output: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "round_bound": self.round_bound,
            "rounds": [asdict(rec) for rec in self.rounds],
            "s_can": self.s_can,
            "final_estimates": [
                {"price": p, "revenue": rev}
                for p, rev in self.final_estimates.items()
            ],
            "output": self.output,
            "notes": self.notes,
        }


def build_grid(params: SearchParams) -> np.ndarray:
    """Ascending {l (1+eps)^k : k >= 0, l (1+eps)^k <= r}."""
    k_max = int(
        math.floor(math.log(params.r / params.ell) / math.log1p(params.eps))
    )
    grid = params.ell * np.power(1 + params.eps, np.arange(k_max + 2))
    return grid[grid <= params.r * (1 + GRID_RTOL)]


def round_bound(params: SearchParams) -> int:
    return int(math.ceil(params.R_tilde))


def query_bound(params: SearchParams) -> int:
    """
    Ledger cap of one run: each round costs at most 3 revenue budgets and
    every member of S_can one more, with |S_can| <= 2R + 19.
    """
    return (5 * round_bound(params) + 20) * revenue_queries(params.budgets)


def pick_pivots(S: np.ndarray) -> Tuple[float, float]:
    """
    Smallest members of S strictly above l + 0.2 (r - l) and l + 0.5 (r - l).

    Raises:
        InternalInvariantWarning: |S| < 20 or a pivot leaves its window
            (l + 0.3 (r - l), resp. l + 0.6 (r - l)).
    """
    S = np.asarray(S, dtype=float)
    if len(S) < MIN_LOOP_SIZE:
        raise InternalInvariantWarning(
            f"pivots need at least {MIN_LOOP_SIZE} candidates, got {len(S)}"
        )
    lo, hi = S[0], S[-1]
    width = hi - lo
    a = S[np.searchsorted(S, lo + PIVOT_A * width, side="right")]
    b = S[np.searchsorted(S, lo + PIVOT_B * width, side="right")]
    if not (a < lo + WINDOW_A * width and b < lo + WINDOW_B * width):
        raise InternalInvariantWarning(
            f"pivots a={a:.6g}, b={b:.6g} outside their windows on "
            f"[{lo:.6g}, {hi:.6g}]"
        )
    return float(a), float(b)


def run(
    params: SearchParams, oracle: PricingOracle
) -> Tuple[float, RunTrace]:
    """
    Run the search against a fresh oracle.

    Args:
        params: search parameters.
        oracle: pricing oracle; its ledger records every query.

    Returns:
        The chosen price, always a member of build_grid(params), and the
        trace of the run.
    """
    grid = build_grid(params)
    m_q = quantile_queries(params.budgets)
    m_r = revenue_queries(params.budgets)
    bound = round_bound(params)
    trace = RunTrace(grid=grid.tolist(), round_bound=bound)
    # q(ell) >= gamma cannot be checked without knowing the distribution
    trace.notes.append("precondition q(ell) >= gamma unverified")
    logger.debug(
        f"grid of {len(grid)} prices on [{params.ell:.4g}, {params.r:.4g}], "
        f"{m_q} queries per sale-rate check, {m_r} per revenue estimate"
    )

    S = grid
    s_can = set()
    while len(S) >= MIN_LOOP_SIZE:
        i = trace.n_rounds + 1
        if i > bound:
            raise InternalInvariantWarning(
                f"round {i} exceeds the round bound {bound}"
            )
        a, b = pick_pivots(S)
        q_hat = estimate_quantile(oracle, b, m_q, phase="quantile")
        rev_a = rev_b = None
        if q_hat < QUANTILE_CUT * params.gamma:
            S_next = S[S <= b]
            decision = "prune-right-by-quantile"
        else:
            s_can.update((a, b))
            rev_a = estimate_revenue(oracle, a, m_r, phase="revenue")
            rev_b = estimate_revenue(oracle, b, m_r, phase="revenue")
            if (1 + params.eps) * rev_a < (1 - params.eps) * rev_b:
                S_next = S[S >= a]
                decision = "keep-right"
            else:
                S_next = S[S <= b]
                decision = "keep-left"
        if len(S_next) >= len(S):
            raise InternalInvariantWarning(f"round {i} did not shrink S")
        trace.rounds.append(
            RoundRecord(
                i=i,
                ell_i=float(S[0]),
                r_i=float(S[-1]),
                size=len(S),
                a=a,
                b=b,
                q_hat_b=q_hat,
                decision=decision,
                size_next=len(S_next),
                rev_a=rev_a,
                rev_b=rev_b,
            )
        )
        logger.debug(f"round {i}: {decision}, |S| {len(S)} -> {len(S_next)}")
        S = S_next

    s_can.update(float(p) for p in S)
    trace.s_can = sorted(s_can)
    for p in trace.s_can:
        trace.final_estimates[p] = estimate_revenue(
            oracle, p, m_r, phase="final"
        )
    best = max(trace.final_estimates.values())
    trace.output = next(
        p for p in trace.s_can if trace.final_estimates[p] == best
    )
    logger.debug(
        f"output {trace.output:.6g} after {trace.n_rounds} rounds and "
        f"{oracle.ledger.total} queries"
    )
    return trace.output, trace

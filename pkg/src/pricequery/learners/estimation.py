"""
Empirical quantile/revenue estimators and their query budgets. All
logarithms are natural; the constant C absorbs any change of base.
"""
import math
from dataclasses import dataclass

from pricequery.oracle import PricingOracle


class EstimationWarning(BaseException):
    pass


def ceil_count(x: float) -> int:
    """Ceiling that ignores float noise just above an integer; at least 1."""
    return max(1, int(math.ceil(x * (1 - 1e-12))))


@dataclass(frozen=True)
class EstimateBudgets:
    """
    Attributes:
        C: the "sufficiently large" constant of the budget formulas
        R_tilde: round bound, unceiled
        delta: failure probability
        gamma: sale-probability floor
        eps: multiplicative accuracy
    """

    C: float
    R_tilde: float
    delta: float
    gamma: float
    eps: float

    def __post_init__(self):
        for name in ("C", "R_tilde", "delta", "gamma", "eps"):
            if not getattr(self, name) > 0:
                raise EstimationWarning(f"{name} must be positive")
        for name in ("delta", "gamma", "eps"):
            if getattr(self, name) > 1:
                raise EstimationWarning(f"{name} must be at most 1")

    @property
    def log_term(self) -> float:
        return self.C * math.log(self.R_tilde / self.delta)


def quantile_queries(b: EstimateBudgets) -> int:
    """ceil(C ln(R/delta) / gamma)"""
    return ceil_count(b.log_term / b.gamma)


def revenue_queries(b: EstimateBudgets) -> int:
    """ceil(C ln(R/delta) / (gamma eps^2))"""
    return ceil_count(b.log_term / (b.gamma * b.eps ** 2))


def bernstein_queries(q: float, rel_err: float, delta: float) -> int:
    """
    Queries after which the empirical sale rate is within rel_err * q of q
    with probability 1 - delta, from Bernstein's inequality with the
    variance bounded by q.
    """
    err = rel_err * q
    return ceil_count((2 * q + 2 * err / 3) * math.log(2 / delta) / err ** 2)


def estimate_quantile(
    o: PricingOracle, p: float, m: int, phase: str = "quantile"
) -> float:
    """Fraction of m fresh buyers that accept price p."""
    if m < 1:
        raise EstimationWarning(f"m={m} must be at least 1")
    return o.query_batch(p, m, phase) / m


def estimate_revenue(
    o: PricingOracle, p: float, m: int, phase: str = "revenue"
) -> float:
    return p * estimate_quantile(o, p, m, phase)

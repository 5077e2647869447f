"""
Pricing-query interaction: every query draws a fresh hidden value and
only reveals whether it reaches the posted price.
"""
from collections import Counter
from typing import Dict, Optional

import numpy as np

from pricequery.distributions.families import Distribution


class OracleWarning(BaseException):
    pass


class BudgetExhausted(OracleWarning):
    pass


class HintAlreadyConsumed(OracleWarning):
    pass


class QueryLedger:
    """
    Monotone counter of pricing queries, split by phase label.
    """

    def __init__(self):
        self._by_phase: Counter = Counter()

    @property
    def total(self) -> int:
        return sum(self._by_phase.values())

    @property
    def by_phase(self) -> Dict[str, int]:
        return dict(self._by_phase)

    def record(self, phase: str, m: int = 1) -> None:
        if m < 0:
            raise OracleWarning("ledger counters never decrease")
        self._by_phase[phase] += m

    def to_dict(self) -> dict:
        return {"total": self.total, "by_phase": self.by_phase}


class PricingOracle:
    """
    Posted-price access to a hidden value distribution.

    The distribution and the generator are kept private: callers see
    sale bits, the ledger and the single hint sample only.

    Attributes:
        ledger: QueryLedger of all pricing queries so far
        budget: optional cap on ledger.total

    Methods:
        query:
        query_batch:
        draw_hint_sample:
    """

    __slots__ = ("_distribution", "_rng", "_hint_used", "ledger", "budget")

    def __init__(
        self,
        distribution: Distribution,
        rng: np.random.Generator,
        budget: Optional[int] = None,
    ):
        self._distribution = distribution
        self._rng = rng
        self._hint_used = False
        self.ledger = QueryLedger()
        self.budget = budget

    def _charge(self, m: int, phase: str) -> None:
        if self.budget is not None and self.ledger.total + m > self.budget:
            raise BudgetExhausted(
                f"{m} more queries exceed the budget of {self.budget} "
                f"({self.ledger.total} used)"
            )
        self.ledger.record(phase, m)

    def query(self, p: float, phase: str = "query") -> int:
        """Post price p to one fresh buyer; 1 iff the buyer's value >= p."""
        return int(self.query_batch(p, 1, phase))

    def query_batch(self, p: float, m: int, phase: str = "query") -> int:
        """
        Post price p to m fresh buyers and return the number of sales.
        Equivalent to m calls of query, metered as m queries.
        """
        m = int(m)
        if m < 1:
            raise OracleWarning(f"m={m} must be at least 1")
        self._charge(m, phase)
        values = self._distribution.sample(self._rng, size=m)
        return int(np.count_nonzero(values >= p))

    def draw_hint_sample(self) -> float:
        """
        One fully observed value drawn before any pricing. Not a pricing
        query, so the ledger is left untouched.
        """
        if self._hint_used:
            raise HintAlreadyConsumed("the hint sample was already drawn")
        self._hint_used = True
        return float(self._distribution.sample(self._rng))

"""
Uniform-budget grid search for general distributions on [1, H]: every
price of a geometric grid gets the same number of queries and the
empirical revenue maximizer wins.
"""
import logging
import math
from typing import Dict, Optional

import numpy as np

from pricequery.distributions.checkers import brute_force_opt
from pricequery.distributions.families import Distribution
from pricequery.learners.estimation import ceil_count, estimate_revenue
from pricequery.oracle import PricingOracle

logger = logging.getLogger(__name__)


class GridSearchWarning(BaseException):
    pass


def grid_for_general(H: float, eps: float) -> np.ndarray:
    """[1, (1+eps), ..., (1+eps)^K, H] with K = floor(log_{1+eps} H)."""
    if H < 1:
        raise GridSearchWarning(f"H={H} must be at least 1")
    if not 0 < eps < 1:
        raise GridSearchWarning(f"eps={eps} must lie in (0, 1)")
    K = int(math.floor(math.log(H) / math.log1p(eps) + 1e-12))
    grid = np.power(1 + eps, np.arange(K + 1))
    grid = grid[grid <= H]
    return np.unique(np.append(grid, float(H)))


def per_price_budget(H: float, eps: float, delta: float) -> int:
    """N = ceil(16 H / eps^2 ln(4 H / (eps delta)))"""
    return ceil_count(16 * H / eps ** 2 * math.log(4 * H / (eps * delta)))


def query_bound(H: float, eps: float, delta: float) -> int:
    return len(grid_for_general(H, eps)) * per_price_budget(H, eps, delta)


def estimate_grid(
    H: float, eps: float, delta: float, oracle: PricingOracle
) -> Dict[float, float]:
    """Estimated revenue of every grid price, N fresh queries each."""
    grid = grid_for_general(H, eps)
    N = per_price_budget(H, eps, delta)
    logger.debug(f"{len(grid)} prices x {N} queries")
    return {
        float(p): estimate_revenue(oracle, float(p), N, "revenue")
        for p in grid
    }


def run_general(
    H: float, eps: float, delta: float, oracle: PricingOracle
) -> float:
    """Empirical revenue maximizer over the grid, lowest price on ties."""
    estimates = estimate_grid(H, eps, delta, oracle)
    best = max(estimates.values())
    return next(p for p in estimates if estimates[p] == best)


def grid_anchor(
    d: Distribution, S: np.ndarray, eps: float, grid_points: int = 10 ** 5
) -> Optional[float]:
    """
    A member p of S with p^opt / (1+eps) <= p <= p^opt, if there is one;
    its revenue is then at least (1 - eps) Opt.
    """
    p_opt = brute_force_opt(d, grid_points).opt_price
    S = np.asarray(S, dtype=float)
    inside = S[(S >= p_opt / (1 + eps) * (1 - 1e-12)) & (S <= p_opt)]
    if len(inside) == 0:
        return None
    return float(inside.max())

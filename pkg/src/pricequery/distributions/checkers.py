"""
Brute-force revenue oracle and numerical checkers for the structural
properties of value distributions (regularity, MHR, half-concavity and
the revenue lower bounds of regular distributions).

A check passes when no grid point violates the property by more than
tol relative to the scale of the checked quantity. The grid resolution
at which a pass is meaningful is a modelling choice, see DESIGN.md.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize

from pricequery.distributions.families import (
    DiscreteAtoms,
    Distribution,
    DistributionWarning,
)

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class OptResult:
    opt_price: float
    opt_revenue: float
    grid_resolution: int


@dataclass(frozen=True)
class Violation:
    kind: str
    points: Tuple[float, ...]
    values: Tuple[float, ...]
    margin: float


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    violation: Optional[Violation] = None

    def __bool__(self) -> bool:
        return self.passed


def price_grid(
    d: Distribution,
    grid_points: int,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
) -> np.ndarray:
    """
    Geometric grid over [lo, hi] (the support by default), augmented with
    every breakpoint and atom of d that falls inside.
    """
    lo = d.support_lo if lo is None else lo
    hi = d.support_hi if hi is None else hi
    if lo > 0:
        grid = np.geomspace(lo, hi, grid_points)
    else:
        grid = np.linspace(lo, hi, grid_points)
    extra = d.breakpoints()
    extra = extra[(extra >= lo) & (extra <= hi)]
    return np.unique(np.concatenate([grid, extra, [lo, hi]]))


def _argmax_lowest(prices: np.ndarray, revenues: np.ndarray) -> int:
    best = revenues.max()
    return int(np.flatnonzero(revenues >= best * (1.0 - TIE_RTOL))[0])


def brute_force_opt(d: Distribution, grid_points: int = 10 ** 5) -> OptResult:
    """
    Revenue maximizer of d by exhaustive scan.

    Args:
        d: distribution with bounded support.
        grid_points: number of geometric grid points, at least 1000.

    Returns:
        OptResult; ties are broken toward the lowest price.
    """
    assert grid_points >= 10 ** 3, "grid_points must be at least 1000"
    if not np.isfinite(d.support_hi):
        raise DistributionWarning("brute force needs a bounded support")
    grid = price_grid(d, grid_points)
    rev = d.revenue(grid)
    idx = _argmax_lowest(grid, rev)
    return OptResult(float(grid[idx]), float(rev[idx]), len(grid))


def constrained_opt(
    d: Distribution,
    lo: float,
    hi: float,
    gamma: float,
    grid_points: int = 10 ** 5,
) -> Optional[OptResult]:
    """max Rev(p) over p in [lo, hi] with q(p) >= gamma; None if empty."""
    grid = price_grid(d, grid_points, lo, hi)
    grid = grid[d.quantile_prob(grid) >= gamma]
    if len(grid) == 0:
        return None
    rev = d.revenue(grid)
    idx = _argmax_lowest(grid, rev)
    return OptResult(float(grid[idx]), float(rev[idx]), len(grid))


def _first_decrease(
    x: np.ndarray, y: np.ndarray, tol: float, kind: str
) -> CheckResult:
    scale = tol * np.maximum(1.0, np.abs(y[:-1]))
    drop = y[:-1] - y[1:] - scale
    bad = np.flatnonzero(drop > 0)
    if len(bad) == 0:
        return CheckResult(True)
    i = bad[0]
    return CheckResult(
        False,
        Violation(
            kind, (x[i], x[i + 1]), (y[i], y[i + 1]), float(y[i] - y[i + 1])
        ),
    )


def _first_convex_triple(
    x: np.ndarray, y: np.ndarray, tol: float, kind: str
) -> CheckResult:
    """Midpoint test on a uniform grid: y[i] >= (y[i-1] + y[i+1]) / 2."""
    if len(y) < 3:
        return CheckResult(True)
    scale = tol * max(1.0, float(np.abs(y).max()))
    gap = 0.5 * (y[:-2] + y[2:]) - y[1:-1]
    bad = np.flatnonzero(gap > scale)
    if len(bad) == 0:
        return CheckResult(True)
    i = bad[0] + 1
    return CheckResult(
        False,
        Violation(
            kind,
            (x[i - 1], x[i], x[i + 1]),
            (y[i - 1], y[i], y[i + 1]),
            float(gap[i - 1]),
        ),
    )


def _continuous_grid(d: Distribution, grid_points: int) -> np.ndarray:
    # the top of the support may carry an atom, so it is left out
    return np.linspace(
        d.support_lo, d.support_hi, grid_points, endpoint=False
    )


def check_concavity_in_quantile(
    d: Distribution, grid_points: int = 10 ** 4, tol: float = 1e-6
) -> CheckResult:
    """Concavity of R(u) = u v(u) on a uniform grid of (0, 1]."""
    u = np.linspace(0.0, 1.0, grid_points + 1)[1:]
    return _first_convex_triple(
        u, d.revenue_in_quantile(u), tol, "quantile-revenue-convex"
    )


def check_regular(
    d: Distribution, grid_points: int = 10 ** 4, tol: float = 1e-6
) -> CheckResult:
    """
    Regularity: the virtual value is nondecreasing on the continuous part
    and the revenue curve is concave in quantile space. Families without
    a density are judged by the quantile-space test alone.
    """
    if d.has_density:
        grid = _continuous_grid(d, grid_points)
        result = _first_decrease(
            grid, d.virtual_value(grid), tol, "virtual-value-decreasing"
        )
        if not result:
            return result
    return check_concavity_in_quantile(d, grid_points, tol)


def check_mhr(
    d: Distribution, grid_points: int = 10 ** 4, tol: float = 1e-6
) -> CheckResult:
    """Monotone hazard rate on the continuous part of the support."""
    if not d.has_density:
        if d.support_lo == d.support_hi:
            return CheckResult(True)
        return CheckResult(
            False,
            Violation(
                "no-density", (d.support_lo, d.support_hi), (np.nan,), np.nan
            ),
        )
    grid = _continuous_grid(d, grid_points)
    return _first_decrease(
        grid, d.hazard_rate(grid), tol, "hazard-rate-decreasing"
    )


def check_mhr_optimal_quantile(
    d: Distribution, grid_points: int = 10 ** 5, tol: float = 1e-6
) -> CheckResult:
    """q(p^opt) >= 1/e, which every MHR distribution satisfies."""
    opt = brute_force_opt(d, grid_points)
    q_opt = d.quantile_prob(opt.opt_price)
    if q_opt >= np.exp(-1.0) - tol:
        return CheckResult(True)
    return CheckResult(
        False,
        Violation(
            "optimal-quantile-small",
            (opt.opt_price,),
            (q_opt,),
            float(np.exp(-1.0) - q_opt),
        ),
    )


def check_half_concavity(
    d: Distribution,
    grid_points: int = 10 ** 4,
    tol: float = 1e-6,
    opt_grid_points: int = 10 ** 5,
) -> CheckResult:
    """Midpoint concavity of Rev(p) on [support_lo, p^opt]."""
    opt = brute_force_opt(d, opt_grid_points)
    grid = np.linspace(d.support_lo, opt.opt_price, grid_points)
    return _first_convex_triple(
        grid, d.revenue(grid), tol, "revenue-convex-below-opt"
    )


def check_rev_lower_bounds(
    d: Distribution,
    grid_points: int = 10 ** 4,
    tol: float = 1e-6,
    opt_grid_points: int = 10 ** 5,
) -> CheckResult:
    """
    Rev(p) >= Opt (1 - q(p)) for p <= p^opt and Rev(p) >= Opt q(p) for
    p >= p^opt, up to tol * Opt.
    """
    opt = brute_force_opt(d, opt_grid_points)
    grid = price_grid(d, grid_points)
    q = d.quantile_prob(grid)
    rev = grid * q
    bound = np.where(
        grid <= opt.opt_price, opt.opt_revenue * (1.0 - q), -np.inf
    )
    bound = np.maximum(
        bound,
        np.where(grid >= opt.opt_price, opt.opt_revenue * q, -np.inf),
    )
    gap = bound - rev
    bad = np.flatnonzero(gap > tol * opt.opt_revenue)
    if len(bad) == 0:
        return CheckResult(True)
    i = bad[0]
    return CheckResult(
        False,
        Violation(
            "revenue-below-bound", (grid[i],), (rev[i], bound[i]), gap[i]
        ),
    )


def target_price(
    d: Distribution,
    eps: float,
    grid_points: int = 10 ** 5,
    xtol: float = 1e-12,
) -> float:
    """
    p^opt when q(p^opt) >= eps, otherwise the price where q crosses eps.
    Keeps at least (1 - eps) of the optimal revenue for regular d.

    Args:
        d: regular distribution.
        eps: 0 < eps <= 0.1
        grid_points: resolution of the brute-force optimum.
        xtol: absolute tolerance of the bisection.
    """
    if not 0 < eps <= 0.1:
        raise DistributionWarning(f"eps={eps} must lie in (0, 0.1]")
    opt = brute_force_opt(d, grid_points)
    if d.quantile_prob(opt.opt_price) >= eps:
        return opt.opt_price
    if isinstance(d, DiscreteAtoms):
        atoms = d.values[d.quantile_prob(d.values) <= eps]
        return float(atoms.min())
    try:
        return float(
            optimize.bisect(
                lambda p: d.quantile_prob(p) - eps,
                d.support_lo,
                opt.opt_price,
                xtol=xtol,
            )
        )
    except ValueError as err:
        raise DistributionWarning(f"q never crosses eps={eps}: {err}")

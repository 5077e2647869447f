"""
Closed-form lower-bound distributions: the regular pair F+/F- on [1, H],
the MHR pair F0/F1 on [1, 2] and the general family F0..F_{K-1} on
{1} and a price ladder in [H/2, H], plus numerical checks of the facts
their lower-bound arguments rest on.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pricequery.distributions import checkers
from pricequery.distributions.families import (
    DiscreteAtoms,
    Distribution,
    PiecewiseCdf,
)

logger = logging.getLogger(__name__)

ALPHA_REGULAR = 0.01


class HardInstanceWarning(BaseException):
    pass


@dataclass(frozen=True)
class RegularPair:
    f_plus: Distribution
    f_minus: Distribution
    H: float
    eps: float
    alpha: float = ALPHA_REGULAR

    @property
    def members(self) -> List[Distribution]:
        return [self.f_minus, self.f_plus]

    @property
    def p_minus(self) -> float:
        """Prices above p_minus are not (1 - alpha eps)-optimal for F-."""
        return (1 - self.alpha * self.eps) * self.H / (2 - self.alpha)

    @property
    def p_plus(self) -> float:
        """Prices below p_plus are not (1 - alpha eps)-optimal for F+."""
        return (
            (1 - self.alpha * self.eps)
            * (2 + self.eps)
            * self.H
            / (3 + self.alpha * (2 + self.eps))
        )


@dataclass(frozen=True)
class MhrPair:
    f0: Distribution
    f1: Distribution
    eps: float
    alpha: float
    d2: float

    @property
    def members(self) -> List[Distribution]:
        return [self.f0, self.f1]


@dataclass(frozen=True)
class GeneralFamily:
    base: Distribution
    perturbed: List[Distribution]
    H: float
    eps: float
    spacing: float
    K: int
    support: np.ndarray = field(repr=False)

    @property
    def members(self) -> List[Distribution]:
        return list(self.perturbed)

    def member(self, k: int) -> Distribution:
        """F_0 for k = 0, else the k-th perturbed distribution."""
        if k == 0:
            return self.base
        if not 1 <= k <= self.K - 1:
            raise HardInstanceWarning(f"member k={k} not in [0, {self.K-1}]")
        return self.perturbed[k - 1]


@dataclass(frozen=True)
class SeparationResult:
    """
    Attributes:
        disjoint: no grid price is near-optimal for two members
        hulls: (min, max) of each member's near-optimal grid prices
        witness: thresholds between consecutive hulls, ordered by price
    """

    disjoint: bool
    hulls: List[Tuple[float, float]]
    witness: Optional[List[float]]

    def __bool__(self) -> bool:
        return self.disjoint


def regular_plus_is_regular(H: float, eps: float) -> bool:
    """
    F+ has virtual value -H/(H-4) below H/2 and -H eps just above, so it
    is regular iff eps <= 1/(H-4).
    """
    return eps <= 1.0 / (H - 4.0) + 1e-12


def make_regular_pair(H: float, eps: float) -> RegularPair:
    """
    Args:
        H: top of the value range, H >= 10
        eps: 0 < eps <= 1/10
    """
    if H < 10:
        raise HardInstanceWarning(f"H={H} must be at least 10")
    if not 0 < eps <= 0.1:
        raise HardInstanceWarning(f"eps={eps} must lie in (0, 1/10]")
    head = (2 * H - 4, 0.0, H, H - 4)
    # F-: (2-4e)/(v-He) then (1+e)/(2v-H(1-e))
    f_minus = PiecewiseCdf(
        breaks=[1.0, H / 2, H * (2 - eps) / 3, H],
        coefs=[
            head,
            (2 - 4 * eps, 0.0, -H * eps, 1.0),
            (1 + eps, 0.0, -H * (1 - eps), 2.0),
        ],
        top_atom=1.0 / H,
        class_claim="regular",
        source=_lb_doc("lb-regular-pair", H=H, eps=eps, member="minus"),
    )
    # F+: (2+4e)/(v+He) then (1-e)/(2v-H(1+e))
    f_plus = PiecewiseCdf(
        breaks=[1.0, H / 2, H * (2 + eps) / 3, H],
        coefs=[
            head,
            (2 + 4 * eps, 0.0, H * eps, 1.0),
            (1 - eps, 0.0, -H * (1 + eps), 2.0),
        ],
        top_atom=1.0 / H,
        class_claim="regular" if regular_plus_is_regular(H, eps) else "general",
        source=_lb_doc("lb-regular-pair", H=H, eps=eps, member="plus"),
    )
    if f_plus.class_claim != "regular":
        logger.info(
            f"F+ with H={H}, eps={eps} is not regular (needs eps <= "
            f"{1 / (H - 4):.4g}); tagged general"
        )
    return RegularPair(f_plus=f_plus, f_minus=f_minus, H=H, eps=eps)


def make_mhr_pair(eps: float) -> MhrPair:
    """
    Piecewise-constant densities on [1, 2] that agree on [1, 1.5).

    Args:
        eps: 0 < eps <= 1/64
    """
    if not 0 < eps <= 1 / 64:
        raise HardInstanceWarning(f"eps={eps} must lie in (0, 1/64]")
    alpha = 16 * eps
    d2 = (0.8 - 0.4 * alpha) / (0.5 - alpha)
    f0 = PiecewiseCdf(
        breaks=[1.0, 1.5, 2.0],
        coefs=[(1.4, -0.4, 1.0, 0.0), (3.2, -1.6, 1.0, 0.0)],
        top_atom=0.0,
        class_claim="mhr",
        source=_lb_doc("lb-mhr-pair", eps=eps, member=0),
    )
    f1 = PiecewiseCdf(
        breaks=[1.0, 1.5 + alpha, 2.0],
        coefs=[(1.4, -0.4, 1.0, 0.0), (2 * d2, -d2, 1.0, 0.0)],
        top_atom=0.0,
        class_claim="mhr",
        source=_lb_doc("lb-mhr-pair", eps=eps, member=1),
    )
    return MhrPair(f0=f0, f1=f1, eps=eps, alpha=alpha, d2=d2)


def _general_ladder(H: float, eps: float) -> Tuple[np.ndarray, float, int]:
    spacing = H * eps / 2
    K = int(round(1 / eps)) + 1
    prices = H / 2 + spacing * np.arange(K)
    prices[-1] = H
    return prices, spacing, K


def make_general_family(H: float, eps: float) -> GeneralFamily:
    """
    F0 puts 1 - 10/H on value 1 and w_k = 5 spacing / (p_k p_{k+1}) on each
    ladder price p_k (w_K = 5/H at p_K = H), making Rev(p_k) = 5 on the
    whole ladder. F_k moves w_k from p_k up to p_{k+1}.

    Args:
        H: top of the value range, H >= 20
        eps: 0 < eps <= 1/10 with 1/eps an integer
    """
    if H < 20:
        raise HardInstanceWarning(f"H={H} must be at least 20")
    if not 0 < eps <= 0.1:
        raise HardInstanceWarning(f"eps={eps} must lie in (0, 1/10]")
    if abs(1 / eps - round(1 / eps)) > 1e-9:
        raise HardInstanceWarning(f"1/eps={1 / eps} must be an integer")
    prices, spacing, K = _general_ladder(H, eps)
    weights = np.empty(K)
    weights[:-1] = 5 * spacing / (prices[:-1] * prices[1:])
    weights[-1] = 5 / H
    base = DiscreteAtoms(
        np.append(1.0, prices),
        np.append(1.0 - 10.0 / H, weights),
        source=_lb_doc("lb-general-family", H=H, eps=eps, member=0),
    )
    perturbed = []
    for k in range(1, K):
        w = weights.copy()
        w[k] += w[k - 1]
        w = np.delete(w, k - 1)
        perturbed.append(
            DiscreteAtoms(
                np.append(1.0, np.delete(prices, k - 1)),
                np.append(1.0 - 10.0 / H, w),
                source=_lb_doc("lb-general-family", H=H, eps=eps, member=k),
            )
        )
    return GeneralFamily(
        base=base,
        perturbed=perturbed,
        H=H,
        eps=eps,
        spacing=spacing,
        K=K,
        support=prices,
    )


def _lb_doc(family: str, **params) -> dict:
    return {"family": family, "params": params}


def separation_check(
    instance: Union[RegularPair, MhrPair, GeneralFamily, Sequence[Distribution]],
    approx_factor: float,
    grid_points: int = 10 ** 6,
) -> SeparationResult:
    """
    Decide whether any single price is approx_factor-optimal for two
    members at once.

    Args:
        instance: a constructed pair/family or a list of distributions.
        approx_factor: fraction of each member's optimum that counts as
            near-optimal.
        grid_points: geometric grid resolution; breakpoints and atoms of
            all members are added.

    Returns:
        SeparationResult with one witness threshold per gap between
        consecutive near-optimal sets when they are disjoint.
    """
    members = getattr(instance, "members", instance)
    lo = min(m.support_lo for m in members)
    hi = max(m.support_hi for m in members)
    grid = np.geomspace(lo, hi, grid_points)
    extra = np.concatenate([m.breakpoints() for m in members])
    grid = np.unique(np.concatenate([grid, extra]))

    hits = np.zeros(len(grid), dtype=np.int32)
    hulls = []
    for m in members:
        rev = m.revenue(grid)
        near = rev >= approx_factor * rev.max()
        hits += near
        hulls.append((float(grid[near].min()), float(grid[near].max())))

    disjoint = bool(hits.max() <= 1)
    witness = None
    if disjoint:
        ordered = sorted(hulls)
        gaps = [(a[1], b[0]) for a, b in zip(ordered[:-1], ordered[1:])]
        if all(left < right for left, right in gaps):
            witness = [0.5 * (left + right) for left, right in gaps]
    logger.debug(
        f"separation at factor {approx_factor}: disjoint={disjoint}, "
        f"witness={witness}"
    )
    return SeparationResult(disjoint=disjoint, hulls=hulls, witness=witness)


def _fact(
    rows: list, fact: str, expected, computed, passed: bool
) -> None:
    rows.append(
        {
            "fact": fact,
            "expected": expected,
            "computed": computed,
            "passed": bool(passed),
        }
    )


def _open_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n points in (lo, hi]"""
    return np.linspace(lo, hi, n + 1)[1:]


def verify_regular_pair(
    H: float,
    eps: float,
    grid_points: int = 10 ** 4,
    tol: float = 1e-6,
    separation_grid_points: int = 10 ** 6,
    opt_grid_points: int = 10 ** 5,
    exact_tol: float = 1e-9,
) -> pd.DataFrame:
    pair = make_regular_pair(H, eps)
    fm, fp = pair.f_minus, pair.f_plus
    rows: list = []
    p_opt_plus = H * (2 + eps) / 3
    _fact(rows, "Rev_F-(H/2)", 2.0, fm.revenue(H / 2),
          abs(fm.revenue(H / 2) - 2.0) <= exact_tol)
    _fact(rows, "Rev_F+(H(2+eps)/3)", 2 + eps, fp.revenue(p_opt_plus),
          abs(fp.revenue(p_opt_plus) - (2 + eps)) <= exact_tol)
    for name, d, price, rev in (
        ("F-", fm, H / 2, 2.0),
        ("F+", fp, p_opt_plus, 2 + eps),
    ):
        opt = checkers.brute_force_opt(d, opt_grid_points)
        _fact(rows, f"opt price {name}", price, opt.opt_price,
              abs(opt.opt_price - price) <= 1e-6 * price)
        _fact(rows, f"opt revenue {name}", rev, opt.opt_revenue,
              abs(opt.opt_revenue - rev) <= exact_tol)

    head = np.linspace(1.0, H / 2, grid_points)
    diff = float(np.abs(fp.quantile_prob(head) - fm.quantile_prob(head)).max())
    _fact(rows, "q+ = q- on [1, H/2]", 0.0, diff, diff <= exact_tol)
    tail = _open_grid(H / 2, H, grid_points)
    diff = float(np.abs(fp.quantile_prob(tail) - fm.quantile_prob(tail)).max())
    _fact(rows, "max |q+ - q-| on (H/2, H] <= 14 eps/H", 14 * eps / H, diff,
          diff <= 14 * eps / H + exact_tol)
    q_tail = fm.quantile_prob(tail)
    _fact(rows, "q- in [1/H, 5/H] on (H/2, H]",
          (1 / H, 5 / H), (float(q_tail.min()), float(q_tail.max())),
          q_tail.min() >= 1 / H - exact_tol and q_tail.max() <= 5 / H + exact_tol)

    for name, d, expected in (
        ("F- regular", fm, True),
        ("F+ regular", fp, regular_plus_is_regular(H, eps)),
    ):
        got = bool(checkers.check_regular(d, grid_points, tol))
        _fact(rows, name, expected, got, got == expected)

    sep = separation_check(pair, 1 - pair.alpha * eps, separation_grid_points)
    _fact(rows, "disjoint (1 - 0.01 eps)-optimal sets", True, sep.disjoint,
          sep.disjoint)
    if sep.disjoint:
        gap = (sep.hulls[0][1], sep.hulls[1][0])
        _fact(rows, "gap covers (p-, p+)", (pair.p_minus, pair.p_plus), gap,
              gap[0] <= pair.p_minus + exact_tol
              and gap[1] >= pair.p_plus - exact_tol)
    return pd.DataFrame(rows)


def verify_mhr_pair(
    eps: float,
    grid_points: int = 10 ** 4,
    tol: float = 1e-6,
    separation_grid_points: int = 10 ** 6,
    opt_grid_points: int = 10 ** 5,
    exact_tol: float = 1e-9,
) -> pd.DataFrame:
    pair = make_mhr_pair(eps)
    f0, f1, alpha = pair.f0, pair.f1, pair.alpha
    rows: list = []
    for name, d in (("F0", f0), ("F1", f1)):
        _fact(rows, f"Pr_{name}[v in [1, 1.5)]", 0.2, d.cdf(1.5),
              abs(d.cdf(1.5) - 0.2) <= exact_tol)
    for name, d, price, rev in (
        ("F0", f0, 1.5, 1.2),
        ("F1", f1, 1.5 + alpha, 1.2 + 0.2 * alpha - 0.4 * alpha ** 2),
    ):
        _fact(rows, f"Rev_{name}({price:g})", rev, d.revenue(price),
              abs(d.revenue(price) - rev) <= exact_tol)
        opt = checkers.brute_force_opt(d, opt_grid_points)
        _fact(rows, f"opt price {name}", price, opt.opt_price,
              abs(opt.opt_price - price) <= 1e-6)

    grid = np.linspace(1.0, 2.0, grid_points, endpoint=False)
    ratio = float((f1.quantile_prob(grid) / f0.quantile_prob(grid)).max())
    _fact(rows, "q1/q0 <= 1/(1 - 2 alpha)", 1 / (1 - 2 * alpha), ratio,
          ratio <= 1 / (1 - 2 * alpha) + exact_tol)
    upper = np.linspace(1.5, 2.0, grid_points)
    low = float((1 - f1.quantile_prob(upper)).min())
    _fact(rows, "1 - q1 >= 0.2 on [1.5, 2]", 0.2, low, low >= 0.2 - exact_tol)

    for name, d in (("F0", f0), ("F1", f1)):
        got = bool(checkers.check_mhr(d, grid_points, tol))
        _fact(rows, f"{name} MHR", True, got, got)

    sep = separation_check(pair, 1 - eps, separation_grid_points)
    _fact(rows, "disjoint (1 - eps)-optimal sets", True, sep.disjoint,
          sep.disjoint)
    return pd.DataFrame(rows)


def verify_general_family(
    H: float,
    eps: float,
    separation_grid_points: int = 10 ** 6,
    exact_tol: float = 1e-9,
) -> pd.DataFrame:
    family = make_general_family(H, eps)
    base, p = family.base, family.support
    rows: list = []
    rev = base.revenue(p)
    worst = float(np.abs(rev - 5.0).max())
    _fact(rows, "Rev_F0(p_k) = 5 for all k", 5.0, worst, worst <= exact_tol)
    mass = float(base.probs[1:].sum())
    _fact(rows, "sum_k w_k = 10/H", 10 / H, mass,
          abs(mass - 10 / H) <= exact_tol)
    _fact(rows, "Pr_F0[v = 1] = 1 - 10/H", 1 - 10 / H, base.probs[0],
          abs(base.probs[0] - (1 - 10 / H)) <= exact_tol)

    lo, hi = 5 * (1 + eps / 2), 5 * (1 + eps)
    bumps = np.array(
        [family.member(k).revenue(p[k]) for k in range(1, family.K)]
    )
    _fact(rows, "Rev_Fk(p_{k+1}) in [5(1+eps/2), 5(1+eps)]", (lo, hi),
          (float(bumps.min()), float(bumps.max())),
          bumps.min() >= lo - exact_tol and bumps.max() <= hi + exact_tol)

    worst = 0.0
    for k in range(1, family.K):
        x = np.linspace(p[k - 1], p[k], 12)[1:]
        got_k = family.member(k).quantile_prob(x)
        got_0 = base.quantile_prob(x)
        worst = max(
            worst,
            float(np.abs(got_k - 5 / p[k - 1]).max()),
            float(np.abs(got_0 - 5 / p[k]).max()),
        )
    _fact(rows, "q_Fk = 5/p_k and q_F0 = 5/p_{k+1} on (p_k, p_{k+1}]", 0.0,
          worst, worst <= exact_tol)

    sep = separation_check(family, 1 - eps / 4, separation_grid_points)
    _fact(rows, "pairwise disjoint (1 - eps/4)-optimal sets", True,
          sep.disjoint, sep.disjoint)
    return pd.DataFrame(rows)


def verify_instance(
    instance: str,
    H: float = 20.0,
    eps: float = 0.1,
    grid_points: int = 10 ** 4,
    tol: float = 1e-6,
    separation_grid_points: int = 10 ** 6,
) -> pd.DataFrame:
    """
    Table of checked facts (expected vs computed) for a named instance:
    lb-regular-pair, lb-mhr-pair or lb-general (alias lb-general-family).
    """
    if instance == "lb-regular-pair":
        return verify_regular_pair(
            H, eps, grid_points, tol, separation_grid_points
        )
    if instance == "lb-mhr-pair":
        return verify_mhr_pair(eps, grid_points, tol, separation_grid_points)
    if instance in ("lb-general", "lb-general-family"):
        return verify_general_family(H, eps, separation_grid_points)
    raise HardInstanceWarning(f"unknown instance {instance}")

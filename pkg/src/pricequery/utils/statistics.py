from typing import Sequence, Tuple

import numpy as np
from scipy import stats


# ---------------------
# Binomial proportions
# ---------------------
def wilson_interval(
    successes: int, trials: int, confidence: float = 0.95
) -> Tuple[float, float]:
    """ Wilson score interval of a binomial success rate """
    if trials < 1:
        raise ValueError("need at least one trial")
    z = stats.norm.ppf(0.5 + confidence / 2)
    phat = successes / trials
    denom = 1 + z ** 2 / trials
    centre = (phat + z ** 2 / (2 * trials)) / denom
    half = (
        z
        * np.sqrt(phat * (1 - phat) / trials + z ** 2 / (4 * trials ** 2))
        / denom
    )
    # rounding must not push phat outside its own interval
    lo = min(max(0.0, centre - half), phat)
    hi = max(min(1.0, centre + half), phat)
    return float(lo), float(hi)


def binomial_sigma(p: float, n: int) -> float:
    """ Standard deviation of the mean of n Bernoulli(p) draws """
    return float(np.sqrt(p * (1 - p) / n))


# ---------------------------
# Empirical distribution fits
# ---------------------------
def dkw_epsilon(n: int, confidence: float = 0.999) -> float:
    """
    Half-width of the Dvoretzky-Kiefer-Wolfowitz band: the empirical CDF of
    n draws lies within it uniformly with the given confidence.
    """
    return float(np.sqrt(np.log(2 / (1 - confidence)) / (2 * n)))


def empirical_survival(samples: np.ndarray, prices: np.ndarray) -> np.ndarray:
    """ Fraction of samples >= each price """
    ordered = np.sort(samples)
    below = np.searchsorted(ordered, prices, side="left")
    return 1.0 - below / len(ordered)


# --------
# Scaling
# --------
def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """ Least-squares slope of log(y) against log(x) """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 2:
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])

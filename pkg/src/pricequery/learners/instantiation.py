"""
Search parameters for each hint model and distribution class.

    regular-range   value range [1, H], regular       gamma = 1/H
    mhr-range       value range [1, H], MHR           gamma = 1/e
    regular-sample  one sample s, regular             gamma = eps
    mhr-sample      one sample s, MHR                 gamma = 1/e
    general-range   value range [1, H], any           grid search

With one sample the interval [delta s / 8, 4 s / (delta eps)] captures a
near-optimal price with probability 1 - delta/2, so the search itself
runs with failure parameter delta/2.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

from pricequery.learners.unified_search import SearchParams


class InstantiationWarning(BaseException):
    pass


def regular_value_range(
    H: float, eps: float, delta: float, C: float = 20.0
) -> SearchParams:
    return SearchParams(ell=1.0, r=H, eps=eps, delta=delta, gamma=1 / H, C=C)


def mhr_value_range(
    H: float, eps: float, delta: float, C: float = 20.0
) -> SearchParams:
    return SearchParams(
        ell=1.0, r=H, eps=eps, delta=delta, gamma=math.exp(-1), C=C
    )


def _one_sample_interval(s: float, eps: float, delta: float):
    if not s > 0:
        raise InstantiationWarning(f"sample s={s} must be positive")
    return delta * s / 8, 4 * s / (delta * eps)


def regular_one_sample(
    s: float, eps: float, delta: float, C: float = 20.0
) -> SearchParams:
    ell, r = _one_sample_interval(s, eps, delta)
    return SearchParams(ell=ell, r=r, eps=eps, delta=delta / 2, gamma=eps, C=C)


def mhr_one_sample(
    s: float, eps: float, delta: float, C: float = 20.0
) -> SearchParams:
    ell, r = _one_sample_interval(s, eps, delta)
    return SearchParams(
        ell=ell, r=r, eps=eps, delta=delta / 2, gamma=math.exp(-1), C=C
    )


@dataclass(frozen=True)
class Setting:
    """
    Attributes:
        label: CLI name
        requires: class the distribution must belong to
        uses_hint: whether the parameters are built from one sample
        loss: eps multiple lost in the revenue guarantee
        build: parameter builder, None for grid search
    """

    label: str
    requires: str
    uses_hint: bool
    loss: float
    build: Optional[Callable[..., SearchParams]] = None

    def guarantee_factor(self, eps: float) -> float:
        return 1 - self.loss * eps


SETTINGS: Dict[str, Setting] = {
    s.label: s
    for s in (
        Setting("regular-range", "regular", False, 5, regular_value_range),
        Setting("mhr-range", "mhr", False, 5, mhr_value_range),
        Setting("regular-sample", "regular", True, 6, regular_one_sample),
        Setting("mhr-sample", "mhr", True, 5, mhr_one_sample),
        Setting("general-range", "general", False, 3, None),
    )
}


def get_setting(label: str) -> Setting:
    if label not in SETTINGS:
        raise InstantiationWarning(
            f"unknown setting {label}; choose from {sorted(SETTINGS)}"
        )
    return SETTINGS[label]

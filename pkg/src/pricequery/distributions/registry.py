"""
JSON documents <-> Distribution objects.

A document is {"family": <name>, "params": {...}} with

    piecewise-cdf          breaks, coefs, top_atom, class_claim
    discrete-atoms         values, probs, class_claim
    point-mass             value
    truncated-exponential  theta, H
    lb-regular-pair        H, eps, member ("minus" | "plus")
    lb-mhr-pair            eps, member (0 | 1)
    lb-general-family      H, eps, member (0 .. 1/eps)
"""
import json
from pathlib import Path
from typing import Callable, Dict, Optional, Union

from pricequery.distributions import hard_instances
from pricequery.distributions.families import (
    DiscreteAtoms,
    Distribution,
    DistributionWarning,
    PiecewiseCdf,
    PointMass,
    TruncatedExponential,
)


def _regular_member(H: float, eps: float, member: str = "minus"):
    pair = hard_instances.make_regular_pair(H, eps)
    if member not in ("minus", "plus"):
        raise DistributionWarning(f"member={member} must be minus or plus")
    return pair.f_minus if member == "minus" else pair.f_plus


def _mhr_member(eps: float, member: int = 0):
    pair = hard_instances.make_mhr_pair(eps)
    if member not in (0, 1):
        raise DistributionWarning(f"member={member} must be 0 or 1")
    return pair.f0 if member == 0 else pair.f1


def _general_member(H: float, eps: float, member: int = 0):
    return hard_instances.make_general_family(H, eps).member(int(member))


FAMILIES: Dict[str, Callable[..., Distribution]] = {
    PiecewiseCdf.family: PiecewiseCdf,
    DiscreteAtoms.family: DiscreteAtoms,
    PointMass.family: PointMass,
    TruncatedExponential.family: TruncatedExponential,
    "lb-regular-pair": _regular_member,
    "lb-mhr-pair": _mhr_member,
    "lb-general-family": _general_member,
}


def from_dict(doc: dict) -> Distribution:
    try:
        family = doc["family"]
        params = dict(doc.get("params", {}))
    except (KeyError, TypeError, AttributeError):
        raise DistributionWarning(
            f"distribution document needs 'family' and 'params': {doc}"
        )
    if family not in FAMILIES:
        raise DistributionWarning(
            f"unknown family {family}; known: {sorted(FAMILIES)}"
        )
    try:
        return FAMILIES[family](**params)
    except TypeError as err:
        raise DistributionWarning(f"bad params for {family}: {err}")
    except hard_instances.HardInstanceWarning as err:
        raise DistributionWarning(str(err))


def to_dict(d: Distribution) -> dict:
    return d.to_dict()


def resolve(
    name_or_path: Union[str, Path, dict],
    builtins: Optional[Dict[str, dict]] = None,
) -> dict:
    """
    Document for a builtin name, a JSON file or an inline document.
    """
    if isinstance(name_or_path, dict):
        return name_or_path
    builtins = builtins or {}
    if str(name_or_path) in builtins:
        return builtins[str(name_or_path)]
    path = Path(name_or_path)
    if not path.is_file():
        raise DistributionWarning(
            f"{name_or_path} is neither a builtin ({sorted(builtins)}) "
            "nor a JSON file"
        )
    with open(path, "r") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as err:
            raise DistributionWarning(f"{path} is not valid JSON: {err}")


def load(
    name_or_path: Union[str, Path, dict],
    builtins: Optional[Dict[str, dict]] = None,
) -> Distribution:
    return from_dict(resolve(name_or_path, builtins))

import json

import pytest

from pricequery.distributions import registry
from pricequery.distributions.families import (
    DistributionWarning,
    PiecewiseCdf,
    PointMass,
    TruncatedExponential,
)


def test__builtin_names(builtins):
    assert isinstance(registry.load("trunc-exp", builtins), TruncatedExponential)
    assert isinstance(registry.load("point-mass", builtins), PointMass)
    f0 = registry.load("lb-mhr-f0", builtins)
    assert isinstance(f0, PiecewiseCdf)
    assert f0.class_claim == "mhr"
    general = registry.load("lb-general", builtins)
    assert general.support_hi == 20.0


def test__document_round_trip():
    doc = {"family": "point-mass", "params": {"value": 5.0}}
    assert registry.to_dict(registry.from_dict(doc)) == doc


def test__hard_instance_member_document():
    doc = {
        "family": "lb-regular-pair",
        "params": {"H": 20.0, "eps": 0.05, "member": "plus"},
    }
    d = registry.from_dict(doc)
    assert d.class_claim == "regular"
    assert registry.to_dict(d) == doc


def test__json_file(tmp_path):
    doc = {
        "family": "discrete-atoms",
        "params": {"values": [1.0, 4.0], "probs": [0.75, 0.25]},
    }
    path = tmp_path / "atoms.json"
    path.write_text(json.dumps(doc))
    d = registry.load(str(path))
    assert d.quantile_prob(4.0) == 0.25


@pytest.mark.parametrize(
    "doc",
    [
        {"family": "pareto", "params": {}},
        {"params": {"value": 5.0}},
        {"family": "point-mass", "params": {"mass": 5.0}},
        {"family": "lb-mhr-pair", "params": {"eps": 0.1, "member": 0}},
        {"family": "lb-regular-pair", "params": {"H": 20, "eps": 0.1,
                                                 "member": "zero"}},
    ],
)
def test__invalid_documents(doc):
    with pytest.raises(DistributionWarning):
        registry.from_dict(doc)


def test__unknown_name(builtins, tmp_path):
    with pytest.raises(DistributionWarning):
        registry.resolve(str(tmp_path / "missing.json"), builtins)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DistributionWarning):
        registry.resolve(str(bad), builtins)

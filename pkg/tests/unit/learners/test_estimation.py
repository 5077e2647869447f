import math

import numpy as np
import numpy.testing as npt
import pytest

from pricequery.distributions import hard_instances
from pricequery.distributions.families import PointMass
from pricequery.learners import estimation
from pricequery.learners.estimation import EstimateBudgets, EstimationWarning
from pricequery.oracle import PricingOracle
from pricequery.utils import statistics


@pytest.fixture(name="budgets", scope="module")
def create_budgets():
    return EstimateBudgets(C=20, R_tilde=100, delta=0.1, gamma=0.5, eps=0.1)


@pytest.fixture(name="point_mass_oracle")
def create_point_mass_oracle():
    return PricingOracle(PointMass(5.0), np.random.default_rng(0))


class TestBudgets:
    def test__quantile_queries(self, budgets):
        assert estimation.quantile_queries(budgets) == 277

    def test__revenue_queries(self, budgets):
        assert estimation.revenue_queries(budgets) == 27632

    def test__integer_log_term(self):
        b = EstimateBudgets(
            C=10, R_tilde=0.1 * math.e, delta=0.1, gamma=1.0, eps=0.5
        )
        assert estimation.quantile_queries(b) == 10

    def test__bernstein(self):
        assert estimation.bernstein_queries(0.8, 0.1, 0.01) == 1369

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"delta": 0.0},
            {"gamma": 1.5},
            {"C": -1.0},
            {"eps": 0.0},
        ],
    )
    def test__validation(self, kwargs):
        params = dict(C=20, R_tilde=100, delta=0.1, gamma=0.5, eps=0.1)
        params.update(kwargs)
        with pytest.raises(EstimationWarning):
            EstimateBudgets(**params)


class TestEstimators:
    def test__point_mass_quantile(self, point_mass_oracle):
        assert estimation.estimate_quantile(point_mass_oracle, 3.0, 100) == 1.0
        assert estimation.estimate_quantile(point_mass_oracle, 7.0, 100) == 0.0
        assert point_mass_oracle.ledger.by_phase == {"quantile": 200}

    def test__point_mass_revenue(self, point_mass_oracle):
        assert estimation.estimate_revenue(point_mass_oracle, 3.0, 7) == 3.0
        assert estimation.estimate_revenue(point_mass_oracle, 0.0, 7) == 0.0

    def test__empty_batch(self, point_mass_oracle):
        with pytest.raises(EstimationWarning):
            estimation.estimate_quantile(point_mass_oracle, 3.0, 0)

    def test__bernstein_accuracy(self):
        d = hard_instances.make_mhr_pair(1 / 64).f0
        m = estimation.bernstein_queries(0.8, 0.1, 0.01)
        oracle = PricingOracle(d, np.random.default_rng(123))
        hits = [
            abs(estimation.estimate_quantile(oracle, 1.5, m) - 0.8) <= 0.08
            for _ in range(1000)
        ]
        # at least 99% up to binomial slack
        assert np.mean(hits) >= 0.99 - 4 * np.sqrt(0.99 * 0.01 / 1000)
        assert oracle.ledger.total == 1000 * m

    def test__revenue_at_regular_optimum(self, budgets):
        d = hard_instances.make_regular_pair(20.0, 0.1).f_minus
        oracle = PricingOracle(d, np.random.default_rng(7))
        m = estimation.revenue_queries(budgets)
        rev = estimation.estimate_revenue(oracle, 10.0, m)
        npt.assert_allclose(rev, 2.0, rtol=0.1)


@pytest.mark.e2e
def test__revenue_concentration(budgets):
    d = hard_instances.make_mhr_pair(1 / 64).f0
    p, reps = 1.5, 1000
    assert d.quantile_prob(p) >= budgets.gamma
    m = estimation.revenue_queries(budgets)
    rev = d.revenue(p)
    oracle = PricingOracle(d, np.random.default_rng(8))
    misses = [
        abs(estimation.estimate_revenue(oracle, p, m) - rev) > budgets.eps * rev
        for _ in range(reps)
    ]
    target = budgets.delta / (6 * budgets.R_tilde)
    slack = 3 * statistics.binomial_sigma(target, reps)
    assert np.mean(misses) <= target + slack
    assert oracle.ledger.total == reps * m

import math

import numpy as np
import numpy.testing as npt
import pytest

from pricequery.distributions import checkers
from pricequery.distributions.families import PointMass, TruncatedExponential
from pricequery.learners import instantiation, unified_search
from pricequery.learners.estimation import revenue_queries
from pricequery.learners.unified_search import (
    InternalInvariantWarning,
    SearchParams,
    SearchParamsWarning,
)
from pricequery.oracle import PricingOracle


def params(ell=1.0, r=2.0, eps=0.1, delta=0.1, gamma=0.5, C=20.0):
    return SearchParams(ell=ell, r=r, eps=eps, delta=delta, gamma=gamma, C=C)


@pytest.fixture(name="exp_params", scope="module")
def create_exponential_params():
    return instantiation.mhr_value_range(50.0, 0.1, 0.1, C=1.0)


@pytest.fixture(name="exp_run", scope="module")
def run_on_truncated_exponential(exp_params):
    d = TruncatedExponential(0.5, 50.0)
    oracle = PricingOracle(d, np.random.default_rng(2024))
    price, trace = unified_search.run(exp_params, oracle)
    return price, trace, oracle


class TestGrid:
    def test__powers(self):
        grid = unified_search.build_grid(params())
        assert len(grid) == 8
        npt.assert_almost_equal(grid[-1], 1.1 ** 7, decimal=12)

    def test__single_point(self):
        npt.assert_array_equal(
            unified_search.build_grid(params(ell=3.0, r=3.0)), [3.0]
        )
        npt.assert_array_equal(unified_search.build_grid(params(r=1.05)), [1.0])

    def test__round_bound(self):
        assert unified_search.round_bound(params(r=math.e ** 2)) == 443
        assert unified_search.round_bound(params(r=1.0)) == math.ceil(
            66 * math.log(10)
        )

    def test__query_bound(self):
        p = params(r=math.e ** 2)
        assert unified_search.query_bound(p) == (5 * 443 + 20) * revenue_queries(
            p.budgets
        )


class TestPivots:
    def test__geometric_grid(self):
        S = unified_search.build_grid(params(r=1.1 ** 25))
        assert len(S) == 26
        a, b = unified_search.pick_pivots(S)
        npt.assert_almost_equal(a, 1.1 ** 12, decimal=10)
        npt.assert_almost_equal(b, 1.1 ** 19, decimal=10)

    def test__uniform_grid(self):
        a, b = unified_search.pick_pivots(np.arange(100.0))
        assert (a, b) == (20.0, 50.0)

    def test__too_few_candidates(self):
        with pytest.raises(InternalInvariantWarning):
            unified_search.pick_pivots(np.arange(19.0))

    def test__window_violated(self):
        # one huge gap pushes the upper pivot to the top
        S = np.append(np.linspace(0.0, 0.1, 25), 10.0)
        with pytest.raises(InternalInvariantWarning):
            unified_search.pick_pivots(S)


class TestParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"ell": 3.0, "r": 2.0},
            {"ell": 0.0},
            {"eps": 0.0},
            {"eps": 1.0},
            {"delta": 0.0},
            {"gamma": 0.0},
            {"C": 0.0},
            {"r": np.inf},
        ],
    )
    def test__invalid(self, kwargs):
        with pytest.raises(SearchParamsWarning):
            params(**kwargs)

    def test__large_eps_warns(self, caplog):
        params(eps=0.2)
        assert "eps=0.2" in caplog.text

    def test__to_dict(self):
        assert params().to_dict()["gamma"] == 0.5


class TestRun:
    def test__small_grid_skips_loop(self):
        p = params(gamma=0.5, C=1.0)
        oracle = PricingOracle(PointMass(1.5), np.random.default_rng(1))
        price, trace = unified_search.run(p, oracle)
        grid = unified_search.build_grid(p)
        assert trace.n_rounds == 0
        npt.assert_array_equal(trace.s_can, grid)
        npt.assert_almost_equal(price, 1.1 ** 4, decimal=12)
        assert oracle.ledger.by_phase == {
            "final": len(grid) * revenue_queries(p.budgets)
        }
        assert trace.notes == ["precondition q(ell) >= gamma unverified"]

    def test__output_on_grid(self, exp_params, exp_run):
        price, trace, _ = exp_run
        grid = unified_search.build_grid(exp_params)
        assert np.isclose(grid, price, rtol=0, atol=0).any()
        assert price in trace.s_can
        assert trace.output == price

    def test__rounds(self, exp_run):
        _, trace, _ = exp_run
        assert 0 < trace.n_rounds <= trace.round_bound
        first = trace.rounds[0]
        # q(b) is about exp(-12) against a floor of 0.75/e
        assert first.decision == "prune-right-by-quantile"
        assert first.rev_a is None
        for rec in trace.rounds:
            shrink = min(0.1, 0.1 / math.log(rec.r_i / rec.ell_i))
            assert rec.size_next <= rec.size * (1 - shrink)
            assert rec.ell_i < rec.a < rec.b < rec.r_i

    def test__s_can(self, exp_run):
        _, trace, _ = exp_run
        compared = {
            p
            for rec in trace.rounds
            if rec.decision != "prune-right-by-quantile"
            for p in (rec.a, rec.b)
        }
        assert compared <= set(trace.s_can)
        assert len(trace.s_can) <= 2 * trace.n_rounds + 19
        assert set(trace.final_estimates) == set(trace.s_can)

    def test__against_constrained_opt(self, exp_params, exp_run):
        price, _, _ = exp_run
        d = TruncatedExponential(0.5, 50.0)
        best = checkers.constrained_opt(
            d, exp_params.ell, exp_params.r, exp_params.gamma
        )
        assert d.revenue(price) >= (1 - 5 * exp_params.eps) * best.opt_revenue

    def test__queries(self, exp_params, exp_run):
        _, _, oracle = exp_run
        assert set(oracle.ledger.by_phase) <= {"quantile", "revenue", "final"}
        assert oracle.ledger.total <= unified_search.query_bound(exp_params)

    def test__deterministic(self, exp_params, exp_run):
        d = TruncatedExponential(0.5, 50.0)
        oracle = PricingOracle(d, np.random.default_rng(2024))
        price, trace = unified_search.run(exp_params, oracle)
        assert price == exp_run[0]
        assert trace.to_dict() == exp_run[1].to_dict()
        assert oracle.ledger.total == exp_run[2].ledger.total

    def test__round_bound_guard(self, mocker, exp_params):
        mocker.patch(
            "pricequery.learners.unified_search.round_bound", return_value=0
        )
        oracle = PricingOracle(
            TruncatedExponential(0.5, 50.0), np.random.default_rng(0)
        )
        with pytest.raises(InternalInvariantWarning):
            unified_search.run(exp_params, oracle)

    def test__trace_document(self, exp_run):
        doc = exp_run[1].to_dict()
        assert set(doc) == {
            "grid",
            "round_bound",
            "rounds",
            "s_can",
            "final_estimates",
            "output",
            "notes",
        }
        assert doc["rounds"][0]["decision"] == "prune-right-by-quantile"

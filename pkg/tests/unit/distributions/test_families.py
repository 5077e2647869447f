import numpy as np
import numpy.testing as npt
import pytest

from pricequery.distributions import checkers, hard_instances, registry
from pricequery.distributions.families import (
    DiscreteAtoms,
    DistributionWarning,
    PiecewiseCdf,
    PointMass,
    TruncatedExponential,
)
from pricequery.io import load_config
from pricequery.utils import statistics

BUILTIN_NAMES = sorted(load_config()["builtin_distributions"])


@pytest.fixture(name="pair", scope="module")
def create_regular_pair():
    return hard_instances.make_regular_pair(20.0, 0.1)


@pytest.fixture(name="mhr", scope="module")
def create_mhr_pair():
    return hard_instances.make_mhr_pair(1 / 64)


@pytest.fixture(name="family", scope="module")
def create_general_family():
    return hard_instances.make_general_family(20.0, 0.1)


class TestQuantileAndCdf:
    def test__cdf_at_support_lo(self, pair):
        assert pair.f_minus.cdf(1.0) == 0.0

    def test__cdf_at_top_atom(self, pair):
        npt.assert_almost_equal(pair.f_minus.cdf(20.0), 1 - 1 / 20, decimal=12)
        assert pair.f_minus.cdf(20.0 + 1e-9) == 1.0

    def test__cdf_mhr_linear_head(self, mhr):
        npt.assert_almost_equal(mhr.f0.cdf(1.25), 0.1, decimal=12)
        npt.assert_almost_equal(mhr.f1.cdf(1.25), 0.1, decimal=12)

    def test__quantile_prob_sells_at_top_atom(self, pair):
        npt.assert_almost_equal(
            pair.f_minus.quantile_prob(20.0), 1 / 20, decimal=12
        )

    def test__quantile_prob_general_family(self, family):
        npt.assert_almost_equal(family.base.quantile_prob(10.0), 0.5, decimal=12)

    def test__quantile_prob_is_one_below_support(self, pair, family):
        assert pair.f_plus.quantile_prob(1.0) == 1.0
        assert family.base.quantile_prob(0.5) == 1.0

    def test__vectorized(self, pair):
        q = pair.f_minus.quantile_prob(np.array([1.0, 10.0, 30.0]))
        npt.assert_allclose(q, [1.0, 0.2, 0.0], atol=1e-12)


class TestRevenue:
    def test__regular_pair_optima(self, pair):
        npt.assert_almost_equal(pair.f_minus.revenue(10.0), 2.0, decimal=12)
        npt.assert_almost_equal(pair.f_plus.revenue(14.0), 2.1, decimal=12)

    def test__mhr_optimum(self, mhr):
        npt.assert_almost_equal(mhr.f0.revenue(1.5), 1.2, decimal=12)

    def test__zero_price(self, pair):
        assert pair.f_minus.revenue(0.0) == 0.0


class TestInverseSurvival:
    def test__head_piece(self, pair):
        npt.assert_almost_equal(
            pair.f_minus.inverse_survival(0.2), 10.0, decimal=10
        )

    def test__atom_quantiles_map_to_top(self, pair):
        assert pair.f_minus.inverse_survival(0.01) == 20.0

    def test__discrete(self):
        d = DiscreteAtoms([1.0, 100.0], [0.5, 0.5])
        assert d.inverse_survival(0.3) == 100.0
        assert d.inverse_survival(0.7) == 1.0
        assert d.inverse_survival(1.0) == 1.0

    def test__out_of_range(self, pair):
        with pytest.raises(DistributionWarning):
            pair.f_minus.inverse_survival(0.0)

    def test__revenue_in_quantile(self):
        d = TruncatedExponential(0.5, 10.0)
        u = np.exp(-0.5)
        npt.assert_almost_equal(d.revenue_in_quantile(u), 2 * u, decimal=12)


class TestSampling:
    def test__point_mass(self):
        d = PointMass(5.0)
        rng = np.random.default_rng(1)
        assert d.sample(rng) == 5.0
        assert np.all(d.sample(rng, size=100) == 5.0)

    def test__mhr_mean(self, mhr):
        rng = np.random.default_rng(2021)
        draws = mhr.f0.sample(rng, size=10 ** 6)
        npt.assert_almost_equal(mhr.f0.mean(), 1.65, decimal=12)
        sigma = np.sqrt(draws.var() / len(draws))
        assert abs(draws.mean() - 1.65) < 4 * sigma

    def test__general_family_mass_at_one(self, family):
        rng = np.random.default_rng(11)
        draws = family.base.sample(rng, size=10 ** 6)
        freq = np.mean(draws == 1.0)
        sigma = statistics.binomial_sigma(0.5, len(draws))
        assert abs(freq - 0.5) < 4 * sigma

    def test__samples_inside_support(self, pair):
        rng = np.random.default_rng(3)
        draws = pair.f_plus.sample(rng, size=10 ** 4)
        assert draws.min() >= 1.0
        assert draws.max() <= 20.0

    def test__same_seed_same_draws(self, pair):
        a = pair.f_minus.sample(np.random.default_rng(5), size=10)
        b = pair.f_minus.sample(np.random.default_rng(5), size=10)
        npt.assert_array_equal(a, b)


@pytest.mark.e2e
@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test__sampler_dkw(name, builtins):
    d = registry.load(name, builtins)
    draws = d.sample(np.random.default_rng(1999), size=10 ** 6)
    prices = checkers.price_grid(d, 2000)
    gap = np.abs(
        statistics.empirical_survival(draws, prices) - d.quantile_prob(prices)
    )
    assert gap.max() <= statistics.dkw_epsilon(len(draws), 0.999)


class TestDensities:
    def test__mhr_density(self, mhr):
        npt.assert_almost_equal(mhr.f0.density(1.2), 0.4, decimal=12)
        npt.assert_almost_equal(mhr.f0.density(1.7), 1.6, decimal=12)

    def test__virtual_value_of_regular_head(self, pair):
        npt.assert_almost_equal(
            pair.f_minus.virtual_value(5.0), -20 / 16, decimal=12
        )

    def test__hazard_rate_exponential(self):
        d = TruncatedExponential(0.5, 10.0)
        npt.assert_allclose(d.hazard_rate([1.5, 4.0, 9.0]), 0.5, rtol=1e-12)

    def test__atoms_have_no_density(self):
        d = DiscreteAtoms([1.0, 4.0], [0.75, 0.25])
        assert not d.has_density
        with pytest.raises(DistributionWarning):
            d.density(2.0)
        with pytest.raises(DistributionWarning):
            d.virtual_value(2.0)
        with pytest.raises(DistributionWarning):
            PointMass(5.0).hazard_rate(5.0)


class TestConstruction:
    def test__discontinuous_pieces(self):
        with pytest.raises(DistributionWarning):
            PiecewiseCdf(
                breaks=[1.0, 1.5, 2.0],
                coefs=[(1.4, -0.4, 1.0, 0.0), (3.0, -1.5, 1.0, 0.0)],
            )

    def test__probabilities_must_sum_to_one(self):
        with pytest.raises(DistributionWarning):
            DiscreteAtoms([1.0, 2.0], [0.5, 0.4])

    def test__unknown_class_claim(self):
        with pytest.raises(DistributionWarning):
            DiscreteAtoms([1.0], [1.0], class_claim="convex")

    def test__truncated_exponential_mean(self):
        d = TruncatedExponential(0.5, 10.0)
        npt.assert_almost_equal(
            d.mean(), 1 + (1 - np.exp(-4.5)) / 0.5, decimal=12
        )
        npt.assert_almost_equal(d.top_atom, np.exp(-4.5), decimal=15)


class TestDocuments:
    def test__point_mass(self):
        assert PointMass(5.0).to_dict() == {
            "family": "point-mass",
            "params": {"value": 5.0},
        }

    def test__hard_instance_keeps_source(self, pair):
        assert pair.f_plus.to_dict() == {
            "family": "lb-regular-pair",
            "params": {"H": 20.0, "eps": 0.1, "member": "plus"},
        }

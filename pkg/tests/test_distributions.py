import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import betaln
from scipy.stats import beta as beta_dist

from oddsrecal.cohort import population_or
from oddsrecal.core import DomainError
from oddsrecal.distributions import (
    BetaParams,
    auc_beta,
    auc_empirical,
    beta_from_moments,
    exact_or_beta,
    expected_updated_mean,
    sample_beta,
    seed_sequence,
)

shapes = st.floats(0.05, 200)


def brute_force_auc(risks, outcomes):
    pos = risks[outcomes == 1]
    neg = risks[outcomes == 0]
    diff = pos[:, None] - neg[None, :]
    return ((diff > 0).sum() + 0.5 * (diff == 0).sum()) / (pos.size * neg.size)


def quad_updated_mean(a, b, x):
    f = lambda p: p * x / (1 - p + p * x)  # noqa: E731
    if min(a, b) < 1:
        # algebraic endpoint weight absorbs the density singularities
        val = integrate.quad(f, 0, 1, weight="alg", wvar=(a - 1, b - 1), epsabs=1e-14, epsrel=1e-13)[0]
        return val / math.exp(betaln(a, b))
    g = lambda p: f(p) * beta_dist.pdf(p, a, b)  # noqa: E731
    return integrate.quad(g, 0, 1, limit=500, epsabs=1e-13, epsrel=1e-12, points=[a / (a + b)])[0]


class TestBetaFromMoments:
    def test_uniform(self):
        p = beta_from_moments(0.5, 1 / 12)
        np.testing.assert_allclose([p.alpha, p.beta], [1, 1], rtol=1e-14)

    def test_frozen(self):
        p = beta_from_moments(0.25, 0.01)
        np.testing.assert_allclose([p.alpha, p.beta], [4.4375, 13.3125], rtol=1e-14)

    @given(st.floats(0.01, 0.99), st.floats(1e-4, 0.999))
    def test_round_trip(self, mean, frac):
        v = frac * mean * (1 - mean)
        p = beta_from_moments(mean, v)
        np.testing.assert_allclose([p.mean, p.variance], [mean, v], rtol=1e-12)

    @pytest.mark.parametrize("mean,v", [(0.5, 0.25), (0.5, 0.3), (0.5, 0.0), (0.5, -0.1), (1.0, 0.1)])
    def test_invalid(self, mean, v):
        with pytest.raises(DomainError):
            beta_from_moments(mean, v)

    def test_params_validated(self):
        with pytest.raises(DomainError):
            BetaParams(0.0, 1.0)
        with pytest.raises(DomainError):
            BetaParams(1.0, math.inf)


class TestSampleBeta:
    def test_uniform_mean(self):
        draws = sample_beta(BetaParams(1, 1), 100_000, seed=7)
        assert abs(draws.mean() - 0.5) < 4 * (1 / math.sqrt(12)) / math.sqrt(1e5)

    def test_variance(self):
        draws = sample_beta(BetaParams(2, 2), 100_000, seed=1)
        # standard error of the sample variance from the fourth central moment
        mu4 = beta_dist(2, 2).expect(lambda p: (p - 0.5) ** 4)
        se = math.sqrt((mu4 - 0.05**2) / 1e5)
        assert abs(draws.var() - 0.05) < 4 * se

    def test_deterministic(self):
        p = BetaParams(0.7, 3.1)
        np.testing.assert_array_equal(sample_beta(p, 1000, 3), sample_beta(p, 1000, 3))
        assert not np.array_equal(sample_beta(p, 1000, 3), sample_beta(p, 1000, 4))

    def test_streams_independent_of_order(self):
        p = BetaParams(2, 5)
        a = sample_beta(p, 100, seed_sequence(0, 1, 2))
        sample_beta(p, 100, seed_sequence(0, 0, 0))
        b = sample_beta(p, 100, seed_sequence(0, 1, 2))
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, sample_beta(p, 100, seed_sequence(0, 2, 1)))

    def test_strictly_inside_unit_interval(self):
        draws = sample_beta(BetaParams(0.01, 0.01), 10_000, seed=0)
        assert np.all((draws > 0) & (draws < 1))

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            sample_beta(BetaParams(1, 1), 0, seed=0)


class TestExpectedUpdatedMean:
    def test_closed_form(self):
        assert expected_updated_mean(BetaParams(1, 1), 2.0) == pytest.approx(2 - 2 * math.log(2), abs=1e-10)

    @given(shapes, shapes)
    def test_identity_or(self, a, b):
        assert expected_updated_mean(BetaParams(a, b), 1.0) == pytest.approx(a / (a + b), abs=1e-10)

    @pytest.mark.parametrize("a,b", [(0.1, 0.3), (0.3, 5), (0.5, 0.5), (2, 3), (40, 7), (900, 100)])
    @pytest.mark.parametrize("x", [1e-3, 0.2, 0.5, 3.0, 50.0])
    def test_against_adaptive_quadrature(self, a, b, x):
        assert expected_updated_mean(BetaParams(a, b), x) == pytest.approx(quad_updated_mean(a, b, x), abs=1e-10)

    @pytest.mark.slow
    def test_monte_carlo(self):
        draws = sample_beta(BetaParams(2, 3), 10_000_000, seed=12)
        updated = draws * 0.5 / (1 - draws + draws * 0.5)
        se = updated.std() / math.sqrt(draws.size)
        assert abs(expected_updated_mean(BetaParams(2, 3), 0.5) - updated.mean()) < 3 * se

    @settings(max_examples=50)
    @given(shapes, shapes, st.floats(1e-2, 1e2), st.floats(1.001, 2))
    def test_increasing(self, a, b, x, step):
        p = BetaParams(a, b)
        assert expected_updated_mean(p, x) < expected_updated_mean(p, x * step)


class TestExactOrBeta:
    def test_identity(self):
        p = BetaParams(2, 7)
        assert exact_or_beta(p, p.mean) == 1.0

    def test_closed_form_inverse(self):
        assert exact_or_beta(BetaParams(1, 1), 2 - 2 * math.log(2)) == pytest.approx(2.0, abs=1e-8)

    @settings(max_examples=50)
    @given(shapes, shapes, st.floats(-4, 4))
    def test_inverse(self, a, b, log_x):
        p = BetaParams(a, b)
        x = math.exp(log_x)
        target = expected_updated_mean(p, x)
        if not 1e-6 < target < 1 - 1e-6:
            return
        assert exact_or_beta(p, target) == pytest.approx(x, rel=1e-9)

    def test_large_sample_consistency(self):
        p0, p1, v = 0.25, 0.1875, 0.0375
        params = beta_from_moments(p0, v)
        draws = sample_beta(params, 1_000_000, seed=99)
        mc = population_or(draws, p1)
        # the sample mean differs from p0, which dominates the Monte Carlo error
        se_log = 1 / (p0 * (1 - p0)) * math.sqrt(v / draws.size)
        assert abs(math.log(exact_or_beta(params, p1)) - math.log(mc)) < 4 * se_log


class TestAucEmpirical:
    def test_small(self):
        assert auc_empirical([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_separated(self):
        assert auc_empirical([0.1, 0.2, 0.7, 0.9], [0, 0, 1, 1]) == 1.0

    def test_all_tied(self):
        assert auc_empirical([0.3] * 6, [0, 1, 0, 1, 1, 0]) == 0.5

    def test_degenerate(self):
        with pytest.raises(DomainError):
            auc_empirical([0.2, 0.3], [1, 1])

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 200), st.integers(2, 40))
    def test_matches_pair_count(self, seed, n, levels):
        rng = np.random.default_rng(seed)
        # coarse levels force plenty of ties
        risks = rng.integers(1, levels, n) / levels
        outcomes = np.zeros(n)
        outcomes[rng.permutation(n)[: rng.integers(1, n)]] = 1
        assert auc_empirical(risks, outcomes) == brute_force_auc(risks, outcomes)


class TestAucBeta:
    def test_uniform(self):
        assert auc_beta(BetaParams(1, 1)) == pytest.approx(5 / 6, abs=1e-12)

    def test_uniform_monte_carlo(self):
        rng = np.random.default_rng(8)
        risks = rng.uniform(size=400_000)
        outcomes = (rng.uniform(size=risks.size) < risks).astype(float)
        assert auc_beta(BetaParams(1, 1)) == pytest.approx(auc_empirical(risks, outcomes), abs=4e-3)

    def test_small_variance_limit(self):
        assert auc_beta(beta_from_moments(0.3, 1e-7)) == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("a,b", [(0.05, 0.3), (0.5, 0.5), (2, 5), (30, 4), (500, 2000)])
    def test_against_double_integral(self, a, b):
        ev, ne = beta_dist(a + 1, b), beta_dist(a, b + 1)
        ref = integrate.quad(lambda p: ev.pdf(p) * ne.cdf(p), 0, 1, limit=500, epsabs=1e-12,
                             points=[a / (a + b)])[0]
        assert auc_beta(BetaParams(a, b)) == pytest.approx(ref, abs=1e-6)

    def test_monte_carlo(self):
        params = beta_from_moments(0.25, 0.026)
        seq = seed_sequence(17)
        risks = sample_beta(params, 1_000_000, seq)
        rng = np.random.default_rng(seq.spawn(1)[0])
        outcomes = (rng.uniform(size=risks.size) < risks).astype(float)
        assert auc_beta(params) == pytest.approx(auc_empirical(risks, outcomes), abs=3e-3)

    @pytest.mark.parametrize("mean", [0.05, 0.25, 0.5, 0.9])
    def test_monotone_in_variance(self, mean):
        vmax = mean * (1 - mean)
        aucs = [auc_beta(beta_from_moments(mean, f * vmax)) for f in np.linspace(0.001, 0.99, 60)]
        assert np.all(np.diff(aucs) >= 0)
        assert 0.5 <= aucs[0] and aucs[-1] <= 1.0

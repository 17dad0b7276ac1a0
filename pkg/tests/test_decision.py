import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sasvfusion.classes import NONBF, SPF, TARBF
from sasvfusion.decision import (
    CostMatrix,
    Priors,
    average_cost,
    conditional_risk,
    decide_linear,
    decide_optimal_llr,
    decide_optimal_posterior,
    decide_ternary_cost,
    decide_utility_argmax,
    llrs_from_posterior,
    optimal_llr_score,
    posterior_from_llrs,
)
from sasvfusion.errors import DomainError

COUNTER = np.array([0.05, 0.65, 0.3])
UNIT = CostMatrix()
FLAT = Priors.flat()

costs = st.builds(CostMatrix, st.floats(0.01, 10), st.floats(0, 10), st.floats(0, 10))


def random_priors(rng):
    return Priors(rng.dirichlet([2, 2, 2]))


class TestCostsAndPriors:
    def test_negative_cost(self):
        with pytest.raises(DomainError):
            CostMatrix(-1, 1, 1)

    def test_all_zero_costs(self):
        with pytest.raises(DomainError):
            CostMatrix(0, 0, 0)

    def test_prior_sum(self):
        with pytest.raises(DomainError):
            Priors([0.3, 0.3, 0.3])

    def test_prior_needs_target_mass(self):
        with pytest.raises(DomainError):
            Priors([0.5, 0.5, 0.0])

    def test_derived_quantities(self):
        p = Priors([0.2, 0.3, 0.5])
        assert p.rho == pytest.approx(0.4)
        assert p.beta == pytest.approx(1.0)
        assert p.linear_threshold == pytest.approx(np.log(0.06 / 0.25))

    def test_flat(self):
        assert FLAT.rho == 0.5
        assert FLAT.beta == pytest.approx(0.5)
        assert FLAT.linear_threshold == pytest.approx(0.0, abs=1e-15)

    def test_json(self):
        p = Priors([0.2, 0.3, 0.5])
        assert p.to_dict() == {"spf": 0.2, "nonbf": 0.3, "tarbf": 0.5}
        assert Priors.from_dict(p.to_dict()) == p
        c = CostMatrix(2, 1, 10)
        assert c.to_dict() == {"miss": 2, "fa_non": 1, "fa_spf": 10}
        assert CostMatrix.from_dict(c.to_dict()) == c

    def test_malformed_json(self):
        with pytest.raises(DomainError):
            Priors.from_dict({"spf": 0.5})
        with pytest.raises(DomainError):
            CostMatrix.from_dict({"miss": "x", "fa_non": 1, "fa_spf": 1})


class TestConditionalRisk:
    def test_reject_counterexample(self):
        assert conditional_risk(False, COUNTER, UNIT) == pytest.approx(0.3)

    def test_accept_counterexample(self):
        assert conditional_risk(True, COUNTER, UNIT) == pytest.approx(0.7)

    def test_accept_without_negative_mass(self):
        eps = 1e-12
        assert conditional_risk(True, [0, eps, 1 - eps], UNIT) == pytest.approx(0, abs=1e-11)

    def test_monte_carlo(self):
        rng = np.random.default_rng(0)
        c = CostMatrix(3, 1, 5)
        p = np.array([0.2, 0.5, 0.3])
        y = rng.choice(3, size=200_000, p=p)
        for action in (True, False):
            mc = average_cost(np.full(y.size, action), y, c)
            assert conditional_risk(action, p, c) == pytest.approx(mc, abs=1e-2)


class TestOptimalPosterior:
    def test_counterexample_rejected(self):
        assert not decide_optimal_posterior(COUNTER, UNIT)

    def test_clear_accept(self):
        assert decide_optimal_posterior([0.1, 0.1, 0.8], UNIT)

    def test_tie_rejects(self):
        assert not decide_optimal_posterior([0.25, 0.25, 0.5], UNIT)

    def test_two_action_enumeration(self):
        rng = np.random.default_rng(1)
        p = rng.dirichlet([1, 1, 1], size=100_000)
        c = CostMatrix(*rng.uniform(0.1, 5, 3))
        risks = np.stack([conditional_risk(False, p, c), conditional_risk(True, p, c)], axis=-1)
        want = np.argmin(risks, axis=-1) == 1
        np.testing.assert_array_equal(decide_optimal_posterior(p, c), want)


class TestOptimalLlr:
    def test_counterexample_via_bayes(self):
        llrs = llrs_from_posterior(COUNTER, FLAT)
        assert not decide_optimal_llr(llrs, FLAT, UNIT)
        assert decide_optimal_llr(llrs, FLAT, UNIT) == decide_optimal_posterior(COUNTER, UNIT)

    def test_flat_zero_llrs(self):
        assert not decide_optimal_llr((0.0, 0.0), FLAT, UNIT)

    def test_zero_miss_cost(self):
        with pytest.raises(DomainError):
            decide_optimal_llr((1.0, 1.0), FLAT, CostMatrix(0, 1, 1))

    @given(st.floats(0.01, 0.98), st.floats(-20, 20), st.floats(-20, 20), costs)
    def test_no_spoofs_reduces_to_asv(self, pi_tar, la, lc, c):
        priors = Priors([0.0, 1 - pi_tar, pi_tar])
        threshold = np.log((1 - pi_tar) / pi_tar * c.c_fa_nonbf / c.c_miss_tarbf) if c.c_fa_nonbf > 0 else -np.inf
        if abs(la - threshold) > 1e-9:
            assert decide_optimal_llr((la, lc), priors, c) == (la > threshold)

    def test_matches_posterior_rule(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            priors = random_priors(rng)
            c = CostMatrix(*rng.uniform(0.1, 5, 3))
            p = rng.dirichlet([1, 1, 1], size=10_000)
            llrs = llrs_from_posterior(p, priors)
            np.testing.assert_array_equal(decide_optimal_llr(llrs, priors, c), decide_optimal_posterior(p, c))

    def test_llr_posterior_round_trip(self):
        rng = np.random.default_rng(3)
        priors = random_priors(rng)
        p = rng.dirichlet([1, 1, 1], size=1000)
        np.testing.assert_allclose(posterior_from_llrs(llrs_from_posterior(p, priors), priors), p, atol=1e-12)

    def test_score_extremes(self):
        # overflow free at |LLR| = 700
        s = optimal_llr_score((np.array([700.0, -700.0]), np.array([-700.0, 700.0])), 0.5)
        assert np.all(np.isfinite(s))


class TestLinear:
    def test_counterexample_accepted(self):
        llrs = llrs_from_posterior(COUNTER, FLAT)
        assert decide_linear(llrs, FLAT)
        assert COUNTER[2] ** 2 > COUNTER[0] * COUNTER[1]

    def test_flat_tie(self):
        assert not decide_linear((0.0, 0.0), FLAT)

    def test_necessity(self):
        rng = np.random.default_rng(4)
        p = rng.dirichlet([1, 1, 1], size=200_000)
        priors = random_priors(rng)
        llrs = llrs_from_posterior(p, priors)
        opt = decide_optimal_posterior(p, UNIT)
        lin = decide_linear(llrs, priors)
        assert not np.any(opt & ~lin)
        assert np.any(lin & ~opt)

    def test_posterior_form(self):
        rng = np.random.default_rng(5)
        p = rng.dirichlet([1, 1, 1], size=10_000)
        priors = random_priors(rng)
        lin = decide_linear(llrs_from_posterior(p, priors), priors)
        np.testing.assert_array_equal(lin, p[:, TARBF] ** 2 > p[:, SPF] * p[:, NONBF])


class TestTernary:
    def test_zero_one(self):
        assert decide_ternary_cost([0.2, 0.3, 0.5], 1 - np.eye(3)) == TARBF

    def test_all_zero(self):
        assert decide_ternary_cost([0.2, 0.3, 0.5], np.zeros((3, 3))) == 0

    def test_reduced_table(self):
        # C[y][a] with zero cost for confusing classes 2 and 3; C12 = C13
        rng = np.random.default_rng(6)
        c12, c21, c31 = 2.0, 1.5, 0.7
        table = np.array([[0, c12, c12], [c21, 0, 0], [c31, 0, 0]])
        p = rng.dirichlet([1, 1, 1], size=50_000)
        merged = c21 * p[:, 1] + c31 * p[:, 2] < c12 * p[:, 0]
        np.testing.assert_array_equal(decide_ternary_cost(p, table) == 0, merged)

    def test_reduced_table_unequal(self):
        rng = np.random.default_rng(7)
        c12, c13, c21, c31 = 2.0, 0.5, 1.0, 3.0
        table = np.array([[0, c12, c13], [c21, 0, 0], [c31, 0, 0]])
        p = rng.dirichlet([1, 1, 1], size=50_000)
        merged = c21 * p[:, 1] + c31 * p[:, 2] < min(c12, c13) * p[:, 0]
        np.testing.assert_array_equal(decide_ternary_cost(p, table) == 0, merged)

    def test_bad_shape(self):
        with pytest.raises(DomainError):
            decide_ternary_cost([0.2, 0.3, 0.5], np.ones((2, 3)))


class TestUtility:
    def test_identity(self):
        assert decide_utility_argmax(COUNTER, np.eye(3)) == NONBF

    def test_differs_from_sasv_rule(self):
        grid = np.array([[a, b, 1 - a - b] for a in np.linspace(0.01, 0.98, 60) for b in np.linspace(0.01, 0.98, 60) if a + b < 0.99])
        util_accept = decide_utility_argmax(grid, np.eye(3)) == TARBF
        opt_accept = decide_optimal_posterior(grid, UNIT)
        assert np.any(util_accept != opt_accept)
        p = np.array([0.34, 0.33, 0.33])
        assert decide_utility_argmax(p, np.eye(3)) == SPF and not decide_optimal_posterior(p, UNIT)
        # argmax picks tar.bf at P(tar.bf)=0.4 where the optimal rule still rejects
        p = np.array([0.3, 0.3, 0.4])
        assert decide_utility_argmax(p, np.eye(3)) == TARBF and not decide_optimal_posterior(p, UNIT)

    @given(st.floats(1e-3, 1e3))
    def test_scale_invariance(self, k):
        u = np.array([[3, 1, 0], [0, 2, 1], [1, 0, 4.0]])
        p = np.random.default_rng(8).dirichlet([1, 1, 1], size=500)
        np.testing.assert_array_equal(decide_utility_argmax(p, k * u), decide_utility_argmax(p, u))

    def test_rejects_weak_diagonal(self):
        with pytest.raises(DomainError):
            decide_utility_argmax(COUNTER, [[1, 1, 0], [0, 1, 0], [0, 0, 1]])


class TestAverageCost:
    def test_by_hand(self):
        accept = np.array([True, False, True, True, False])
        labels = np.array([TARBF, TARBF, NONBF, SPF, SPF])
        c = CostMatrix(2, 3, 5)
        assert average_cost(accept, labels, c) == pytest.approx((0 + 2 + 3 + 5 + 0) / 5)

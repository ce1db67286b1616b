"""Closed-form bounds, the information inequality, and their pinned values."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from neyman_bai.distributions import Instance, Marginal, lower_bound_alternative
from neyman_bai.engine import sweep_worst_case
from neyman_bai.policies import OracleNeyman, Uniform
from neyman_bai.theory import (
    bernoulli_constants,
    binary_relative_entropy,
    check_transportation,
    minimax_lower_bound_constant,
    misid_exponent,
    misid_upper_bound,
    regret_upper_bound_curve,
    worst_case_gap,
)

# d(0.1, 0.5) two independent ways: the two-term formula and the
# entropy decomposition log(2) - H(0.1). Both give this float.
D_01_05 = 0.3680642071684971


class TestMinimaxConstant:
    def test_unit_variances(self):
        assert minimax_lower_bound_constant(1.0, 1.0) == 2.0 * math.exp(-0.5)
        assert minimax_lower_bound_constant(1.0, 1.0) == 1.2130613194252668

    def test_bernoulli_cap(self):
        assert minimax_lower_bound_constant(0.5, 0.5) == 0.6065306597126334

    def test_scales_linearly_in_the_sds(self):
        base = minimax_lower_bound_constant(1.0, 2.0)
        assert minimax_lower_bound_constant(3.0, 6.0) == pytest.approx(3 * base, rel=1e-15)

    def test_rejects_nonpositive_sds(self):
        with pytest.raises(ValueError):
            minimax_lower_bound_constant(0.0, 1.0)
        with pytest.raises(ValueError):
            minimax_lower_bound_constant(1.0, -2.0)


class TestMisidBound:
    def test_zero_gap_bound_is_vacuous(self):
        assert misid_upper_bound(1.0, 1.0, 0.0, 100) == 1.0

    def test_exponent_formula(self):
        # T * gap^2 / (2 (s1+s2)^2) with easy numbers: 800 * 0.25 / 18
        assert misid_exponent(1.0, 2.0, 0.5, 800) == pytest.approx(200.0 / 18.0, rel=1e-15)

    def test_doubling_the_budget_doubles_the_exponent_bitwise(self):
        e1 = misid_exponent(0.7, 1.3, 0.21, 500)
        e2 = misid_exponent(0.7, 1.3, 0.21, 1000)
        assert e2 == 2.0 * e1

    def test_doubling_the_budget_squares_the_bound(self):
        b1 = misid_upper_bound(0.7, 1.3, 0.21, 500)
        b2 = misid_upper_bound(0.7, 1.3, 0.21, 1000)
        assert b2 == pytest.approx(b1 * b1, rel=1e-13)

    def test_log_bound_matches_exponent(self):
        for gap in (0.1, 0.3, 0.9):
            b = misid_upper_bound(1.0, 1.0, gap, 2000)
            assert b < 1.0
            assert -math.log(b) == pytest.approx(
                misid_exponent(1.0, 1.0, gap, 2000), rel=1e-12
            )

    def test_bound_is_clipped_at_one(self):
        # tiny T, tiny gap: raw exp(-eps) > would not exceed 1 anyway,
        # so force it with gap 0 and also check monotonicity in gap
        assert misid_upper_bound(1.0, 1.0, 1e-9, 2) <= 1.0
        gaps = [0.0, 0.05, 0.1, 0.5]
        vals = [misid_upper_bound(1.0, 1.0, g, 100) for g in gaps]
        assert vals == sorted(vals, reverse=True)


class TestWorstCaseGap:
    def test_exact_values(self):
        assert worst_case_gap(1.0, 1.0, 10000) == 0.02
        assert worst_case_gap(2.0, 1.0, 900) == 0.1

    def test_gap_times_sqrt_budget_recovers_the_sd_sum(self):
        for s1, s2, T in [(1.0, 1.0, 10000), (0.5, 2.5, 333), (1.7, 0.2, 7)]:
            lhs = worst_case_gap(s1, s2, T) * math.sqrt(T)
            assert abs(lhs - (s1 + s2)) <= 2 * math.ulp(s1 + s2)


class TestRegretBoundCurve:
    def test_zero_gap_zero_regret(self):
        assert regret_upper_bound_curve(1.0, 1.0, 100, 0.0) == 0.0

    @pytest.mark.parametrize(
        "s1,s2,T", [(1.0, 1.0, 10000), (1.0, 2.0, 500), (0.3, 0.7, 99)]
    )
    def test_value_at_the_critical_gap(self, s1, s2, T):
        """sqrt(T) * curve at gap (s1+s2)/sqrt(T) equals (s1+s2)/sqrt(e)."""
        gap = worst_case_gap(s1, s2, T)
        got = math.sqrt(T) * regret_upper_bound_curve(s1, s2, T, gap)
        want = (s1 + s2) * math.exp(-0.5)
        assert abs(got - want) <= 1e-12

    def test_dense_grid_argmax_sits_at_the_critical_gap(self):
        s1 = s2 = 1.0
        T = 400
        crit = worst_case_gap(s1, s2, T)
        gaps = np.linspace(crit / 50, 4 * crit, 200)
        vals = [regret_upper_bound_curve(s1, s2, T, g) for g in gaps]
        top = gaps[int(np.argmax(vals))]
        assert abs(top - crit) <= gaps[1] - gaps[0]

    def test_curve_is_unimodal_on_the_grid(self):
        gaps = np.linspace(1e-4, 0.5, 300)
        vals = np.array([regret_upper_bound_curve(1.0, 1.0, 400, g) for g in gaps])
        signs = np.sign(np.diff(vals))
        changes = np.count_nonzero(np.diff(signs[signs != 0]))
        assert changes == 1


class TestBinaryRelativeEntropy:
    def test_equal_arguments_are_zero(self):
        for x in (0.0, 0.3, 0.5, 1.0):
            assert binary_relative_entropy(x, x) == 0.0

    def test_reference_value(self):
        assert binary_relative_entropy(0.1, 0.5) == D_01_05
        # decomposition oracle: log 2 minus the binary entropy of 0.1
        h = -(0.1 * math.log(0.1) + 0.9 * math.log(0.9))
        assert binary_relative_entropy(0.1, 0.5) == pytest.approx(math.log(2) - h, abs=1e-15)

    def test_degenerate_reference_is_infinite(self):
        assert binary_relative_entropy(0.3, 0.0) == math.inf
        assert binary_relative_entropy(0.3, 1.0) == math.inf

    def test_degenerate_first_argument(self):
        assert binary_relative_entropy(0.0, 0.4) == pytest.approx(-math.log(0.6))
        assert binary_relative_entropy(1.0, 0.4) == pytest.approx(-math.log(0.4))

    def test_rejects_values_outside_the_unit_interval(self):
        for x, y in [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.1), (0.5, 1.1)]:
            with pytest.raises(ValueError):
                binary_relative_entropy(x, y)

    @given(
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=1e-9, max_value=1.0 - 1e-9),
    )
    def test_pinsker(self, x, y):
        d = binary_relative_entropy(x, y)
        assert d >= 2.0 * (x - y) ** 2 - 1e-12


class TestBernoulliConstants:
    def test_stated_value(self):
        c = bernoulli_constants()
        assert c.stated == 2.0 * math.sqrt(5.0 / math.e)
        assert c.stated == 2.7124875711104828

    def test_variance_capped_value_matches_the_gaussian_constant(self):
        c = bernoulli_constants()
        assert c.variance_capped == minimax_lower_bound_constant(0.5, 0.5)

    def test_the_two_differ_by_two_root_five(self):
        c = bernoulli_constants()
        assert c.stated / c.variance_capped == pytest.approx(2.0 * math.sqrt(5.0), rel=1e-15)


class TestTransportation:
    def test_identical_models_are_trivially_satisfied(self):
        inst = Instance(Marginal.gaussian(0.2, 1.0), Marginal.gaussian(0.0, 1.0))
        rep = check_transportation(inst, inst, Uniform(), T=20, R=200, seed=3)
        assert rep.lhs == 0.0
        assert rep.rhs == 0.0
        assert rep.satisfied

    def test_sure_event_gives_zero_rhs(self):
        base = Instance(Marginal.gaussian(0.2, 1.0), Marginal.gaussian(0.0, 1.0))
        alt = Instance(Marginal.gaussian(0.0, 1.0), Marginal.gaussian(0.2, 1.0))
        rep = check_transportation(
            base, alt, Uniform(), T=20, R=200, seed=3, event=lambda r: True
        )
        assert rep.p_baseline == 1.0
        assert rep.p_alternative == 1.0
        assert rep.rhs == 0.0
        assert rep.lhs > 0.0
        assert rep.satisfied

    def test_confusable_pair_satisfies_the_inequality(self):
        base = Instance(Marginal.gaussian(0.01, 1.0), Marginal.gaussian(0.0, 1.0))
        alt = lower_bound_alternative(1.0, 1.0, 50)
        rep = check_transportation(base, alt, Uniform(), T=50, R=10_000, seed=7)
        assert rep.satisfied
        assert rep.lhs + 3.0 * rep.se >= rep.rhs
        assert rep.mean_n1 == 25.0

    def test_cross_family_models_rejected(self):
        base = Instance(Marginal.gaussian(0.2, 1.0), Marginal.gaussian(0.0, 1.0))
        alt = Instance(Marginal.bernoulli(0.6), Marginal.bernoulli(0.4))
        with pytest.raises(ValueError, match="families"):
            check_transportation(base, alt, Uniform(), T=20, R=10, seed=3)


def test_misid_bound_dominates_an_oracle_simulation():
    """The tail bound must sit above the measured error at every gap."""
    res = sweep_worst_case(
        (1.0, 1.0), 400, OracleNeyman(1.0, 1.0), "sample_mean", R=2000, seed=13
    )
    for p in res.points:
        bound = misid_upper_bound(1.0, 1.0, p.gap, 400)
        assert bound >= p.report.misid_prob - 3.0 * p.report.misid_se

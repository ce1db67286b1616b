"""Marginals, instances, divergences, and the lower-bound construction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neyman_bai.distributions import (
    Family,
    Instance,
    Marginal,
    best_arm,
    fisher_information,
    kl_divergence,
    lower_bound_alternative,
    sample,
)
from neyman_bai.rng import RngState, spawn

# Independent oracle: log 2 minus the natural entropy of 0.1, i.e.
# d(x, 1/2) = log 2 - H(x) with H(x) = -x log x - (1-x) log(1-x).
D_01_05 = math.log(2.0) - (-0.1 * math.log(0.1) - 0.9 * math.log(0.9))


class TestMarginalConstruction:
    def test_gaussian_fields(self):
        m = Marginal.gaussian(0.3, 2.5)
        assert m.family is Family.GAUSSIAN
        assert m.mean == 0.3
        assert m.variance == 2.5
        assert m.sd == math.sqrt(2.5)

    def test_bernoulli_variance_is_bit_exact(self):
        for p in (0.52, 0.48, 0.3, 1e-9, 1 - 1e-9):
            m = Marginal.bernoulli(p)
            assert m.variance == p * (1.0 - p)

    def test_gaussian_rejects_bad_variance(self):
        with pytest.raises(ValueError):
            Marginal.gaussian(0.0, 0.0)
        with pytest.raises(ValueError):
            Marginal.gaussian(0.0, -1.0)

    def test_bernoulli_rejects_boundary_means(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                Marginal.bernoulli(p)

    def test_rejects_nonfinite_mean(self):
        with pytest.raises(ValueError):
            Marginal.gaussian(math.nan, 1.0)
        with pytest.raises(ValueError):
            Marginal.gaussian(math.inf, 1.0)

    def test_mismatched_bernoulli_variance_rejected(self):
        with pytest.raises(ValueError):
            Marginal(Family.BERNOULLI, 0.3, 0.2)


class TestDraws:
    def test_gaussian_moments(self):
        m = Marginal.gaussian(0.7, 4.0)
        x = m.draw(spawn(42, 0), 1_000_000)
        n = x.size
        se_mean = m.sd / math.sqrt(n)
        assert abs(x.mean() - 0.7) < 5 * se_mean
        # variance of the sample variance for a normal is 2 sigma^4 / n
        se_var = math.sqrt(2.0 * m.variance**2 / n)
        assert abs(x.var() - 4.0) < 5 * se_var

    def test_bernoulli_moments_and_support(self):
        m = Marginal.bernoulli(0.3)
        x = m.draw(spawn(42, 1), 1_000_000)
        assert set(np.unique(x)) <= {0.0, 1.0}
        se = m.sd / math.sqrt(x.size)
        assert abs(x.mean() - 0.3) < 5 * se

    def test_scalar_sample_advances_state(self):
        m = Marginal.gaussian(0.0, 1.0)
        y0, r1 = sample(m, RngState(42, 0))
        y0_again, _ = sample(m, RngState(42, 0))
        y1, r2 = sample(m, r1)
        assert y0 == y0_again
        assert y0 != y1
        assert (r1.index, r2.index) == (1, 2)


class TestKL:
    def test_equal_variance_gaussian_is_quadratic(self):
        # the equal-variance branch must be exactly d^2 / (2 v)
        for xi in (1e-2, 1e-3, 0.5):
            p = Marginal.gaussian(0.0, 1.0)
            q = Marginal.gaussian(xi, 1.0)
            assert kl_divergence(p, q) == (xi * xi) / 2.0

    def test_general_gaussian_against_quadrature(self):
        p = Marginal.gaussian(0.3, 1.0)
        q = Marginal.gaussian(0.0, 2.5)
        x = np.linspace(-25.0, 25.0, 2_000_001)
        logp = -0.5 * (x - 0.3) ** 2 - 0.5 * math.log(2 * math.pi)
        logq = -0.5 * x**2 / 2.5 - 0.5 * math.log(2 * math.pi * 2.5)
        oracle = np.trapezoid(np.exp(logp) * (logp - logq), x)
        assert kl_divergence(p, q) == pytest.approx(oracle, abs=1e-12)

    def test_bernoulli_value(self):
        got = kl_divergence(Marginal.bernoulli(0.5), Marginal.bernoulli(0.6))
        oracle = 0.5 * math.log(0.5 / 0.6) + 0.5 * math.log(0.5 / 0.4)
        assert got == pytest.approx(oracle, rel=1e-15)
        assert got == pytest.approx(0.0204, abs=5e-5)

    def test_identical_marginals_give_zero(self):
        m = Marginal.gaussian(1.0, 3.0)
        assert kl_divergence(m, m) == 0.0
        b = Marginal.bernoulli(0.2)
        assert kl_divergence(b, b) == 0.0

    def test_family_mismatch_raises(self):
        with pytest.raises(ValueError):
            kl_divergence(Marginal.gaussian(0.5, 0.25), Marginal.bernoulli(0.5))

    @given(
        mu1=st.floats(-5, 5),
        mu2=st.floats(-5, 5),
        v1=st.floats(0.01, 25),
        v2=st.floats(0.01, 25),
    )
    @settings(max_examples=200)
    def test_gaussian_kl_nonnegative(self, mu1, mu2, v1, v2):
        kl = kl_divergence(Marginal.gaussian(mu1, v1), Marginal.gaussian(mu2, v2))
        assert kl >= 0.0

    @given(p=st.floats(0.001, 0.999), q=st.floats(0.001, 0.999))
    @settings(max_examples=200)
    def test_bernoulli_kl_nonnegative(self, p, q):
        assert kl_divergence(Marginal.bernoulli(p), Marginal.bernoulli(q)) >= 0.0


class TestFisherInformation:
    def test_gaussian_is_inverse_variance(self):
        assert fisher_information(Marginal.gaussian(0.0, 4.0)) == 0.25

    def test_bernoulli_is_inverse_variance(self):
        m = Marginal.bernoulli(0.3)
        assert fisher_information(m) == 1.0 / (0.3 * 0.7)

    @given(v=st.floats(0.01, 100))
    @settings(max_examples=50)
    def test_positive(self, v):
        assert fisher_information(Marginal.gaussian(0.0, v)) > 0.0


class TestInstance:
    def test_arm_lookup_and_gap(self):
        inst = Instance(Marginal.gaussian(0.5, 1.0), Marginal.gaussian(0.2, 2.0))
        assert inst.arm(1) is inst.arm1
        assert inst.arm(2) is inst.arm2
        assert inst.means == (0.5, 0.2)
        assert inst.gap == pytest.approx(0.3)
        with pytest.raises(ValueError):
            inst.arm(3)

    def test_best_arm_prefers_higher_mean(self):
        assert best_arm(Instance(Marginal.gaussian(1.0, 1.0), Marginal.gaussian(0.0, 1.0))) == 1
        assert best_arm(Instance(Marginal.gaussian(0.0, 1.0), Marginal.gaussian(1.0, 1.0))) == 2

    def test_best_arm_tie_goes_to_arm_one(self):
        inst = Instance(Marginal.gaussian(0.4, 1.0), Marginal.gaussian(0.4, 9.0))
        assert best_arm(inst) == 1


class TestLowerBoundAlternative:
    def test_construction(self):
        inst = lower_bound_alternative(1.0, 1.0, 50)
        s = math.sqrt(50)
        assert inst.arm1.mean == -1.0 / s
        assert inst.arm2.mean == 1.0 / s
        assert inst.arm1.variance == 1.0
        assert inst.arm2.variance == 1.0
        assert best_arm(inst) == 2

    def test_gap_scaling_identity(self):
        # gap * sqrt(T) == sigma1 + sigma2 up to IEEE round-off; bitwise
        # equality is unattainable for some inputs (one-ulp cases exist)
        for s1, s2, T in [(1.0, 1.0, 100), (1.0, 1.0, 3), (0.3, 0.7, 7),
                          (2.0, 1.0, 10_000), (1.5, 0.25, 33)]:
            inst = lower_bound_alternative(s1, s2, T)
            lhs = inst.gap * math.sqrt(T)
            rhs = s1 + s2
            assert abs(lhs - rhs) <= 2 * math.ulp(rhs)

    def test_validation(self):
        with pytest.raises(ValueError):
            lower_bound_alternative(0.0, 1.0, 10)
        with pytest.raises(ValueError):
            lower_bound_alternative(1.0, -1.0, 10)
        with pytest.raises(ValueError):
            lower_bound_alternative(1.0, 1.0, 0)


def test_binary_entropy_decomposition_oracle():
    """d(0.1, 0.5) equals log 2 minus the entropy of 0.1 (independent route)."""
    from neyman_bai.theory import binary_relative_entropy

    assert binary_relative_entropy(0.1, 0.5) == pytest.approx(D_01_05, abs=1e-15)

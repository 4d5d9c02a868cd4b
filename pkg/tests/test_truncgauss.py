import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ramsey_gauss import specfn, truncgauss
from ramsey_gauss.exceptions import DomainError
from ramsey_gauss.truncgauss import LOWER, UPPER, TruncatedGaussian

C025 = 0.67448975019608174320


def test_upper_moments_reference():
    d = TruncatedGaussian(-C025)
    assert truncgauss.trunc_mean(d) == pytest.approx(-1.2711062907364277, rel=1e-13)
    assert truncgauss.trunc_var(d) == pytest.approx(0.24163696216176124, rel=1e-12)
    d2 = TruncatedGaussian(-2.0)
    assert truncgauss.trunc_mean(d2) == pytest.approx(-2.3732155328228409, rel=1e-13)
    assert truncgauss.trunc_var(d2) == pytest.approx(0.11427910041408126, rel=1e-12)
    assert truncgauss.upper_var(-1.0) == pytest.approx(0.19909766557034879, rel=1e-12)


def test_V0():
    assert truncgauss.upper_var(0.0) == pytest.approx(1 - 2 / math.pi, abs=1e-15)


def test_gamma_values():
    assert truncgauss.gamma_p(0.25) == pytest.approx(0.75836303783823876, rel=1e-12)
    assert truncgauss.gamma_p(0.01) == pytest.approx(0.90315140496861536, rel=1e-12)
    assert truncgauss.gamma_prime_p(0.25) == pytest.approx(0.46530618843157373, rel=1e-12)
    assert truncgauss.gamma_p(0.49) == pytest.approx(0.64204906267112188, rel=1e-12)
    assert truncgauss.gamma_prime_p(0.49) == pytest.approx(0.63111835943480709, rel=1e-12)
    # at p = 1/2 both sides coincide
    assert truncgauss.gamma_p(0.5) == pytest.approx(2 / math.pi, abs=1e-15)
    assert truncgauss.gamma_prime_p(0.5) == pytest.approx(2 / math.pi, abs=1e-15)


def test_gamma_gap_first_order():
    # near p = 1/2 the gap is 2 c_p V'(0) to first order
    c = -specfn.inverse_Phi(0.49)
    h = 1e-6
    dV = (truncgauss.upper_var(h) - truncgauss.upper_var(-h)) / (2 * h)
    gap = truncgauss.gamma_p(0.49) - truncgauss.gamma_prime_p(0.49)
    assert gap == pytest.approx(2 * c * dV, rel=0.02)


@pytest.mark.parametrize("p", [0.0, -0.1, 0.6, 1.0])
def test_gamma_domain(p):
    with pytest.raises(DomainError):
        truncgauss.gamma_p(p)


def test_bad_side_and_cutoff():
    with pytest.raises(ValueError):
        TruncatedGaussian(0.0, "middle")
    with pytest.raises(DomainError):
        TruncatedGaussian(float("inf"))


def test_cgf_reference_values():
    assert truncgauss.cgf(TruncatedGaussian(-1.0), 0.5) == pytest.approx(0.022644882265864303, rel=1e-12)
    assert truncgauss.cgf(TruncatedGaussian(0.5, LOWER), -0.7) == pytest.approx(0.057448694807524342, rel=1e-12)


def test_cgf_zero_and_slope():
    d = TruncatedGaussian(-1.3)
    assert truncgauss.cgf(d, 0.0) == 0.0
    h = 1e-6
    assert abs(truncgauss.cgf(d, h) - truncgauss.cgf(d, -h)) / (2 * h) < 1e-8


def test_cgf_deep_tail_finite():
    d = TruncatedGaussian(-30.0)
    vals = truncgauss.cgf(d, np.array([0.1, 1.0, 5.0]))
    assert np.all(np.isfinite(vals))
    assert np.all(vals <= truncgauss.cgf_quadratic_bound(d, np.array([0.1, 1.0, 5.0])) + 1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=-8.0, max_value=2.0), st.floats(min_value=1e-3, max_value=5.0))
def test_cgf_quadratic_bound(b, u):
    d = TruncatedGaussian(b)
    assert truncgauss.cgf(d, u) <= truncgauss.cgf_quadratic_bound(d, u) + 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=-2.0, max_value=8.0), st.floats(min_value=-5.0, max_value=-1e-3))
def test_lower_cgf_quadratic_bound_negative_u(b, u):
    d = TruncatedGaussian(b, LOWER)
    assert truncgauss.cgf(d, u) <= truncgauss.cgf_quadratic_bound(d, u) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-12.0, max_value=6.0), st.floats(min_value=1e-2, max_value=2.0))
def test_variance_increasing_and_below_one(b, h):
    v1, v2 = truncgauss.upper_var(b), truncgauss.upper_var(b + h)
    assert v2 > v1
    assert 0 < v1 < 1


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-4.0, max_value=2.0), st.floats(min_value=-1.0, max_value=3.0))
def test_cgf_curvature_is_shifted_variance(b, u):
    d = TruncatedGaussian(b)
    h = 1e-3
    fd = (truncgauss.cgf(d, u + h) - 2 * truncgauss.cgf(d, u) + truncgauss.cgf(d, u - h)) / h ** 2
    assert fd == pytest.approx(truncgauss.upper_var(b - u), rel=1e-5)


def test_lower_side_is_reflection():
    up, lo = TruncatedGaussian(-0.8), TruncatedGaussian(0.8, LOWER)
    assert truncgauss.trunc_mean(lo) == pytest.approx(-truncgauss.trunc_mean(up), rel=1e-15)
    assert truncgauss.trunc_var(lo) == truncgauss.trunc_var(up)
    assert truncgauss.cgf(lo, 0.3) == pytest.approx(truncgauss.cgf(up, -0.3), rel=1e-14)


@pytest.mark.parametrize("b,side", [(-3.0, UPPER), (-1.0, UPPER), (0.0, UPPER), (7.0, UPPER),
                                    (-8.0, UPPER), (-20.0, UPPER), (0.5, LOWER), (9.0, LOWER)])
def test_sampler_support_and_ks(b, side, rng):
    d = TruncatedGaussian(b, side)
    x = truncgauss.sample(d, rng, 20_000)
    assert x.shape == (20_000,)
    if side == UPPER:
        assert np.all(x <= b)
    else:
        assert np.all(x >= b)
    res = stats.kstest(x, lambda t: truncgauss.truncated_cdf(d, t))
    assert res.pvalue > 1e-4


def test_sampler_moments(rng):
    for b in (-3.0, -1.0, 0.0, -10.0):
        d = TruncatedGaussian(b)
        x = truncgauss.sample(d, rng, 200_000)
        se = math.sqrt(truncgauss.trunc_var(d) / x.size)
        assert abs(x.mean() - truncgauss.trunc_mean(d)) < 4 * se


def test_sampler_determinism():
    d = TruncatedGaussian(-1.0)
    a = truncgauss.sample(d, np.random.default_rng(5), 100)
    b = truncgauss.sample(d, np.random.default_rng(5), 100)
    assert np.array_equal(a, b)
    assert isinstance(truncgauss.sample(d, np.random.default_rng(5)), float)

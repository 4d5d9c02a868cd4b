import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ramsey_gauss import mc
from ramsey_gauss.graph import BARTLETT, DIRECT
from ramsey_gauss.params import build_params


def p25(d):
    return build_params(2.0, 100, math.sqrt(d) / 100, p_override=0.25)


def test_clopper_pearson_known_values():
    lo, hi = mc.clopper_pearson(5, 100, 0.95)
    # mpmath bisection on the regularised incomplete beta function
    assert lo == pytest.approx(0.01643187918205216, rel=1e-9)
    assert hi == pytest.approx(0.11283491110546275, rel=1e-9)


def test_clopper_pearson_edges():
    lo, hi = mc.clopper_pearson(0, 1000)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.01 ** (1 / 1000))
    lo, hi = mc.clopper_pearson(1000, 1000)
    assert hi == 1.0 and lo == pytest.approx(0.01 ** (1 / 1000))


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=10_000), st.data())
def test_ci_contains_estimate(n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))
    est = mc.McEstimate.from_counts(k, n, seed=0)
    assert 0 <= est.ci_low <= est.p_hat <= est.ci_high <= 1


def test_ci_coverage():
    # exact intervals are conservative: coverage >= nominal
    rng = np.random.default_rng(1)
    p, n = 0.03, 400
    hits = rng.binomial(n, p, size=2000)
    cover = np.mean([mc.clopper_pearson(int(k), n, 0.9)[0] <= p <= mc.clopper_pearson(int(k), n, 0.9)[1]
                     for k in hits])
    assert cover >= 0.89


def test_block_determinism_and_thread_independence(monkeypatch):
    params = p25(400)
    a = mc.estimate_cliques(params, 3, 250_000, seed=7, sampler=BARTLETT)
    monkeypatch.setenv("RAMSEY_GAUSS_THREADS", "3")
    b = mc.estimate_cliques(params, 3, 250_000, seed=7, sampler=BARTLETT)
    assert a == b
    c = mc.estimate_cliques(params, 3, 250_000, seed=8, sampler=BARTLETT)
    assert c != a


def test_red_blue_direction():
    params = p25(400)
    red, blue = mc.estimate_cliques(params, 3, 2_000_000, seed=0, sampler=BARTLETT)
    assert red.ci_high < 0.25 ** 3
    assert blue.ci_low > 0.75 ** 3


def test_samplers_agree_on_cliques():
    params = p25(100)
    r1, b1 = mc.estimate_cliques(params, 3, 100_000, seed=1, sampler=DIRECT)
    r2, b2 = mc.estimate_cliques(params, 3, 100_000, seed=1, sampler=BARTLETT)
    for x, y in ((r1, r2), (b1, b2)):
        se = math.sqrt(x.p_hat * (1 - x.p_hat) / x.trials * 2)
        assert abs(x.p_hat - y.p_hat) < 4 * se


def test_log_bound_formulas():
    params = p25(400)
    p, a, sd = 0.25, params.a, 20.0
    assert mc.log_bound(params, 3, mc.HMS_RED) == pytest.approx(3 * math.log(p) - a ** 3 / (p ** 3 * sd))
    diff = mc.log_bound(params, 3, mc.HMS_RED) - mc.log_bound(params, 3, mc.NEW_RED)
    from ramsey_gauss.params import beta_quad
    assert diff == pytest.approx(beta_quad(p) * 81 / 400)
    assert mc.log_bound(params, 3, mc.BLUE) == pytest.approx(3 * math.log(0.75) + a ** 3 / (0.75 ** 3 * sd))
    k_shift = mc.log_bound(params, 3, mc.BLUE, K=2.0) - mc.log_bound(params, 3, mc.BLUE)
    assert k_shift == pytest.approx(2.0 * 27 / (params.D * sd))


def test_verdicts():
    params = p25(400)
    bound = math.exp(mc.log_bound(params, 3, mc.HMS_RED))
    high = mc.McEstimate.from_counts(int(2 * bound * 1e5), 100_000, 0)
    assert mc.compare_to_bound(high, params, 3, mc.HMS_RED).verdict == mc.VIOLATED
    low = mc.McEstimate.from_counts(int(0.5 * bound * 1e5), 100_000, 0)
    assert mc.compare_to_bound(low, params, 3, mc.HMS_RED).verdict == mc.CONSISTENT
    tiny = mc.McEstimate.from_counts(0, 100, 0)
    assert mc.compare_to_bound(tiny, params, 3, mc.HMS_RED).verdict == mc.INCONCLUSIVE


def test_in_mc_range():
    params = p25(400)
    assert mc.in_mc_range(params, 3, 3200)
    assert not mc.in_mc_range(params, 3, 3100)
    assert mc.in_mc_range(params, 3, 200, mc.BLUE)


def test_cgf_empirical():
    rep = mc.verify_cgf_empirical(-1.0, [0.0, 0.5, 1.0, 2.0], 200_000, seed=3)
    assert rep["passed"]
    for row in rep["rows"][1:]:
        assert abs(row["z_vs_cgf"]) < 4


def test_jackknife_matches_delta_method():
    rng = np.random.default_rng(0)
    x = rng.exponential(size=50_000)
    theta, se = mc._jackknife_log_mean(x)
    assert theta == pytest.approx(math.log(x.mean()))
    delta = x.std(ddof=1) / math.sqrt(x.size) / x.mean()
    assert se == pytest.approx(delta, rel=1e-3)


def test_mean_shift():
    rep = mc.verify_mean_shift(p25(400), 300_000, seed=2)
    assert rep["passed"]
    assert rep["target"] == pytest.approx(-1.2711062907364277 / 20.0, rel=1e-12)


def test_bartlett_equivalence_small():
    rep = mc.bartlett_equivalence(p25(100), 3, 50_000, seed=4)
    assert rep["passed"]
    assert len(rep["patterns"]) == 8
    assert sum(pt["direct"] for pt in rep["patterns"]) == pytest.approx(1.0)


def test_norm_concentration():
    rep = mc.verify_norm_concentration(400, 0.1, 50_000, seed=5)
    assert rep["passed"]
    assert rep["fraction"] > rep["bound"]


def test_projection_tail():
    rep = mc.verify_projection_tail(2.0, 1, 400, 5, 0.25, 100_000, seed=6)
    assert rep["passed"] and rep["violations"] == 0


def test_square_mgf_bound_against_gaussian():
    # for X ~ N(0, s2), E[exp(lam X^2)] = (1 - 2 lam s2)^-1/2
    for s2, lam in ((1.0, 0.1), (0.5, 0.9), (2.0, 0.2)):
        exact = (1 - 2 * lam * s2) ** -0.5
        assert exact <= mc.square_mgf_bound(s2, lam)


def test_quadratic_mgf_bound_against_mc():
    rng = np.random.default_rng(8)
    k, d, lam = 6, 200, 5.0
    x = rng.standard_normal((400_000, k)) / math.sqrt(d)
    s = (x.sum(axis=1) ** 2 - (x ** 2).sum(axis=1)) / 2
    assert np.mean(np.exp(lam * s)) <= mc.quadratic_mgf_bound(lam, k, d)


def test_refined_variance_factor():
    assert mc.refined_variance_factor(0.25) == pytest.approx(1 - 0.75836303783823876, rel=1e-12)


def test_records_jsonl_roundtrip():
    params = p25(400)
    est = mc.McEstimate.from_counts(10, 1000, 0)
    rec = mc.make_record("red", params, est, {"name": mc.HMS_RED, "value": np.float64(0.1)},
                         mc.CONSISTENT, 0, 1.5)
    buf = io.StringIO()
    mc.write_records([rec, rec], buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2
    back = json.loads(lines[0])
    assert back["estimate"]["successes"] == 10 and back["params"]["d"] == 400
    assert list(back) == sorted(back)


def test_ks_of_inner_products():
    # <v1, v2> * sqrt(d) is close to N(0, 1) at d = 400
    from ramsey_gauss.graph import gram_batch
    g = gram_batch(400, 2, 20_000, np.random.default_rng(2), BARTLETT)
    z = g[:, 0, 1] * 20.0
    assert stats.kstest(z, "norm").pvalue > 1e-3

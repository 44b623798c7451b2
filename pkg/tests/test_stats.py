"""Statistics utilities, cross-checked against scipy where it overlaps.

scipy is a test-only dependency: the library keeps its own closed-form
numerics so runs don't drag in a solver stack.
"""
import math
import random

import numpy as np
import pytest
import scipy.stats

from osbd.stats import (EcdfSummary, kolmogorov_critical, ks_one_sample_normal,
                        ks_two_sample, loglog_fit, normal_cdf, normal_ppf,
                        rule_of_three, tail_estimator, wilson_interval)


def test_kolmogorov_critical_matches_scipy():
    for sig in (0.05, 0.01, 1e-3, 1e-4):
        want = scipy.stats.kstwobign.isf(sig)
        assert kolmogorov_critical(sig) == pytest.approx(want, rel=1e-6)


def test_kolmogorov_critical_domain():
    with pytest.raises(ValueError):
        kolmogorov_critical(0.0)
    with pytest.raises(ValueError):
        kolmogorov_critical(1.0)


def test_normal_helpers_match_scipy():
    for x in (-3.7, -1.0, 0.0, 0.31, 2.9):
        assert normal_cdf(x) == pytest.approx(scipy.stats.norm.cdf(x),
                                              abs=1e-14)
    for p in (1e-9, 0.0241, 0.3, 0.5, 0.975, 1 - 1e-9):
        assert normal_ppf(p) == pytest.approx(scipy.stats.norm.ppf(p),
                                              rel=1e-9)
    with pytest.raises(ValueError):
        normal_ppf(0.0)


def test_two_sample_ks_matches_scipy():
    rng = np.random.default_rng(2)
    for trial in range(5):
        a = rng.normal(size=rng.integers(5, 400))
        b = rng.normal(loc=0.3 * trial, size=rng.integers(5, 400))
        got = ks_two_sample(a, b)
        want = scipy.stats.ks_2samp(a, b, method="asymp").statistic
        assert got.statistic == pytest.approx(want, abs=1e-12)


def test_two_sample_ks_with_heavy_ties():
    a = np.array([1.0, 1.0, 1.0, 2.0])
    b = np.array([1.0, 2.0, 2.0, 2.0])
    got = ks_two_sample(a, b)
    want = scipy.stats.ks_2samp(a, b, method="asymp").statistic
    assert got.statistic == pytest.approx(want, abs=1e-12)


def test_one_sample_ks_matches_scipy():
    rng = np.random.default_rng(3)
    for size in (7, 100, 2001):
        a = rng.normal(size=size) * 1.1
        got = ks_one_sample_normal(a)
        want = scipy.stats.kstest(a, "norm").statistic
        assert got.statistic == pytest.approx(want, abs=1e-12)
        assert got.n2 == 0


def test_ks_result_pass_is_threshold_comparison():
    a = np.random.default_rng(4).normal(size=500)
    res = ks_one_sample_normal(a, significance=0.05)
    assert res.passed == (res.statistic < res.threshold)
    assert res.threshold == pytest.approx(
        kolmogorov_critical(0.05) / math.sqrt(500))


def test_ecdf_summary():
    e = EcdfSummary.from_samples([3.0, 1.0, 2.0, 2.0])
    assert e.count == 4
    assert e.cdf(0.9) == 0.0
    assert e.cdf(2.0) == 0.75
    assert e.cdf(3.0) == 1.0
    assert e.quantile(0.5) == 2.0
    assert e.quantile(1.0) == 3.0
    with pytest.raises(ValueError):
        e.quantile(1.5)
    with pytest.raises(ValueError):
        EcdfSummary.from_samples([])


def test_wilson_interval_matches_scipy():
    for count, n in ((0, 50), (3, 50), (25, 50), (50, 50)):
        lo, hi = wilson_interval(count, n, 0.95)
        want_lo, want_hi = scipy.stats.binomtest(count, n).proportion_ci(
            0.95, method="wilson")
        assert lo == pytest.approx(want_lo, abs=1e-12)
        assert hi == pytest.approx(want_hi, abs=1e-12)


def test_wilson_domain():
    with pytest.raises(ValueError):
        wilson_interval(1, 0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


def test_rule_of_three():
    assert rule_of_three(1000) == 0.003
    with pytest.raises(ValueError):
        rule_of_three(0)


def test_tail_estimator_counts():
    samples = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 2.0, 4.0]
    (pt,) = tail_estimator(samples, [2.0])
    assert pt.p_upper == 3 / 8        # {2, 2, 4}
    assert pt.p_lower == 2 / 8        # {-3, -2}
    assert pt.upper_lo <= pt.p_upper <= pt.upper_hi
    assert pt.lower_lo <= pt.p_lower <= pt.lower_hi
    (far,) = tail_estimator(samples, [9.0])
    assert far.p_upper == 0.0
    assert far.upper_hi == rule_of_three(8)   # zero count fallback


def test_loglog_fit_recovers_planted_exponent():
    rng = random.Random(12)
    points = []
    for x in (8, 16, 32, 64, 128):
        for _ in range(40):
            points.append((x, 3.0 * x ** 0.66 * rng.lognormvariate(0, 0.05)))
    fit = loglog_fit(points)
    assert abs(fit.slope - 0.66) < 0.03
    assert fit.ci_lo <= fit.slope <= fit.ci_hi
    assert fit.ci_hi - fit.ci_lo < 0.1


def test_loglog_fit_is_deterministic():
    points = [(x, x ** 0.7 + r) for x in (4, 8, 16, 32)
              for r in (0.1, 0.2, 0.3)]
    a = loglog_fit(points)
    b = loglog_fit(points)
    assert (a.slope, a.ci_lo, a.ci_hi) == (b.slope, b.ci_lo, b.ci_hi)


def test_loglog_fit_domain():
    with pytest.raises(ValueError):
        loglog_fit([(1.0, 2.0), (2.0, 3.0)])      # < 3 distinct x
    with pytest.raises(ValueError):
        loglog_fit([(1.0, 2.0), (2.0, -3.0), (4.0, 5.0)])
    with pytest.raises(ValueError):
        loglog_fit([])

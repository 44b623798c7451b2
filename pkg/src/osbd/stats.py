"""Distribution-level test utilities: ECDFs, KS tests, tails, exponents.

Self-contained numerics: the Kolmogorov critical value comes from the
series Q(c) = 2·sum_j (-1)^(j-1) exp(-2 j^2 c^2) inverted by bisection,
the normal quantile from the Acklam rational approximation, and the
normal CDF from math.erf.  Tail intervals are Wilson (never Wald), with
the classical rule of three for zero counts.
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from ._philox import PURPOSE_BOOT, compose_c3, split_key, u32_words


@dataclass(frozen=True)
class EcdfSummary:
    """Sorted sample with quantile access; F is right-continuous."""

    samples: np.ndarray
    count: int

    @classmethod
    def from_samples(cls, a) -> "EcdfSummary":
        arr = np.sort(np.asarray(a, dtype=np.float64))
        if arr.size == 0:
            raise ValueError("need at least one sample")
        return cls(samples=arr, count=int(arr.size))

    def cdf(self, x: float) -> float:
        return np.searchsorted(self.samples, x, side="right") / self.count

    def quantile(self, q: float) -> float:
        if not 0.0 <= q <= 1.0:
            raise ValueError("quantile level must be in [0, 1]")
        i = max(0, math.ceil(q * self.count) - 1)
        return float(self.samples[i])


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n1: int
    n2: int            # 0 for one-sample tests
    threshold: float
    significance: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.threshold


def _kolmogorov_survival(c: float) -> float:
    if c <= 0.0:
        return 1.0
    s = 0.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * c * c)
        s += -term if j % 2 == 0 else term
        if term < 1e-18:
            break
    return 2.0 * s


def kolmogorov_critical(significance: float) -> float:
    """c with Q_KS(c) = significance, by bisection on the series."""
    if not 0.0 < significance < 1.0:
        raise ValueError("significance must be in (0, 1)")
    lo, hi = 1e-8, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _kolmogorov_survival(mid) > significance:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ks_two_sample(a, b, significance: float = 1e-3) -> KsResult:
    """Exact sup distance between the two ECDFs; asymptotic critical
    value c(significance)·sqrt((n1+n2)/(n1·n2))."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    stat = float(np.max(np.abs(fa - fb)))
    thr = kolmogorov_critical(significance) * math.sqrt(
        (a.size + b.size) / (a.size * b.size))
    return KsResult(statistic=stat, n1=int(a.size), n2=int(b.size),
                    threshold=thr, significance=significance)


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02,
             -2.759285104469687e+02, 1.383577518672690e+02,
             -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02,
             -1.556989798598866e+02, 6.680131188771972e+01,
             -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01,
             -2.400758277161838e+00, -2.549732539343734e+00,
             4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01,
             2.445134137142996e+00, 3.754408661907416e+00)


def normal_ppf(p: float) -> float:
    """Inverse standard-normal CDF (Acklam), refined by one Halley step."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low, p_high = 0.02425, 1.0 - 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4])
              * q + c[5])
             / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4])
              * r + a[5]) * q
             / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4])
                * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4])
               * q + c[5])
              / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    e = normal_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def ks_one_sample_normal(a, significance: float = 1e-3) -> KsResult:
    """Sup distance between the sample ECDF and the standard normal CDF."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    if a.size == 0:
        raise ValueError("sample must be nonempty")
    n = a.size
    phi = 0.5 * (1.0 + np.vectorize(math.erf)(a / math.sqrt(2.0)))
    up = np.arange(1, n + 1) / n - phi
    dn = phi - np.arange(0, n) / n
    stat = float(max(np.max(up), np.max(dn)))
    thr = kolmogorov_critical(significance) / math.sqrt(n)
    return KsResult(statistic=stat, n1=int(n), n2=0, threshold=thr,
                    significance=significance)


def wilson_interval(count: int, n: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= count <= n:
        raise ValueError("count must be in 0..n")
    z = normal_ppf(0.5 + confidence / 2.0)
    phat = count / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / n
                                   + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def rule_of_three(n: int) -> float:
    """Upper 95%-ish bound on a probability observed 0 times in n trials."""
    if n <= 0:
        raise ValueError("n must be positive")
    return 3.0 / n


TailPoint = namedtuple(
    "TailPoint",
    "x p_upper p_lower upper_lo upper_hi lower_lo lower_hi")


def tail_estimator(samples, x_grid, confidence: float = 0.95):
    """Empirical two-sided exceedance: for each x, P(X >= x) and
    P(X <= -x) with Wilson bounds (rule of three when the count is 0)."""
    a = np.sort(np.asarray(samples, dtype=np.float64))
    if a.size == 0:
        raise ValueError("samples must be nonempty")
    n = int(a.size)
    out = []
    for x in x_grid:
        c_up = n - int(np.searchsorted(a, x, side="left"))
        c_lo = int(np.searchsorted(a, -x, side="right"))
        bounds = []
        for c in (c_up, c_lo):
            if c == 0:
                bounds.append((0.0, rule_of_three(n)))
            else:
                bounds.append(wilson_interval(c, n, confidence))
        out.append(TailPoint(
            x=float(x), p_upper=c_up / n, p_lower=c_lo / n,
            upper_lo=bounds[0][0], upper_hi=bounds[0][1],
            lower_lo=bounds[1][0], lower_hi=bounds[1][1]))
    return out


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    ci_level: float
    ci_lo: float
    ci_hi: float
    points: tuple     # (log x, log y) pairs actually fitted


def _ols_loglog(lx, ly):
    n = lx.size
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    if sxx == 0.0:
        raise ValueError("need at least 2 distinct x values")
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    return slope, float(my - slope * mx)


def loglog_fit(points, n_bootstrap: int = 1000, ci_level: float = 0.95,
               seed: int = 0x105105) -> ExponentFit:
    """Power-law exponent of y against x.

    Replicated measurements share x values; the fit runs on the log of
    the per-x mean, and the bootstrap resamples replicas within each x
    stratum (deterministic counter-based resampling indices).
    """
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    if xs.size == 0 or np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("points must be positive pairs")
    ux = np.unique(xs)
    if ux.size < 3:
        raise ValueError("need at least 3 distinct x values")
    groups = [ys[xs == x] for x in ux]
    lx = np.log(ux)
    ly = np.log(np.asarray([g.mean() for g in groups]))
    slope, intercept = _ols_loglog(lx, ly)
    k0, k1 = split_key(seed)
    c3 = compose_c3(0, PURPOSE_BOOT)
    slopes = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        lyb = np.empty(ux.size)
        for gi, g in enumerate(groups):
            idx = u32_words(k0, k1, c3, b, gi, 0, g.size)
            idx = ((idx.astype(np.uint64) * np.uint64(g.size))
                   >> np.uint64(32)).astype(np.int64)
            lyb[gi] = math.log(g[idx].mean())
        slopes[b] = _ols_loglog(lx, lyb)[0]
    alpha = 1.0 - ci_level
    lo = float(np.quantile(slopes, alpha / 2.0))
    hi = float(np.quantile(slopes, 1.0 - alpha / 2.0))
    lo, hi = min(lo, slope), max(hi, slope)
    return ExponentFit(slope=slope, intercept=intercept,
                       ci_level=ci_level, ci_lo=lo, ci_hi=hi,
                       points=tuple(zip(lx.tolist(), ly.tolist())))

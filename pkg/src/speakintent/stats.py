"""Statistical layer: t-tests against chance, Welch's t-test, regression.

The p-values of interest here get as small as 1e-185, so tail
probabilities are evaluated in log space throughout: the regularized
incomplete beta function is computed with its continued fraction in
linear space (it is O(1)) while the prefactor stays logarithmic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

LN10 = math.log(10.0)
_CF_MAX_ITER = 1000
_CF_EPS = 3e-16
_CF_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise NumericalError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def log_betainc(a: float, b: float, x: float) -> float:
    """Natural log of the regularized incomplete beta I_x(a, b)."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return -math.inf
    if x >= 1.0:
        return 0.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return ln_front + math.log(_betacf(a, b, x) / a)
    # complement converges fast; recover the direct value stably
    ln_comp = ln_front + math.log(_betacf(b, a, 1.0 - x) / b)
    if ln_comp >= 0.0:
        return -math.inf
    return math.log1p(-math.exp(ln_comp))


def _t_sf_ln(t: float, df: float) -> float:
    """ln of the Student-t upper tail P(T > t)."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if t == 0.0:
        return math.log(0.5)
    x = df / (df + t * t)
    ln_half_tail = math.log(0.5) + log_betainc(df / 2.0, 0.5, x)
    if t > 0:
        return ln_half_tail
    return math.log1p(-math.exp(ln_half_tail))


def t_sf_log(t: float, df: float) -> float:
    """log10 of the Student-t upper-tail probability."""
    return _t_sf_ln(float(t), float(df)) / LN10


def t_sf(t: float, df: float) -> float:
    """Student-t upper-tail probability (kept > 0 even when it underflows)."""
    p = math.exp(_t_sf_ln(float(t), float(df)))
    return p if p > 0.0 else 5e-324


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    log10_p: float
    alpha: float
    significant: bool


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float


def _result(t: float, df: float, log10_p: float, alpha: float) -> TTestResult:
    p = 10.0 ** log10_p
    if p <= 0.0:
        p = 5e-324
    p = min(p, 1.0)
    return TTestResult(
        t_statistic=t,
        degrees_of_freedom=df,
        p_value=p,
        log10_p=log10_p,
        alpha=alpha,
        significant=p < alpha,
    )


def t_test_vs_random(mean: float, std: float, n: int = 100, alpha: float = 0.001) -> TTestResult:
    """One-sided pooled two-sample t-test of (mean, std, n) against chance.

    The chance-level pseudo-sample has mean 0.5 and, by assumption, the
    same std and n as the measured sample, so the statistic reduces to
    t = (mean - 0.5) / (std * sqrt(2/n)) with 2n - 2 degrees of freedom;
    the upper tail is the p-value (performance better than guessing).
    """
    if std <= 0:
        raise ValueError("std must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    t = (mean - 0.5) / (std * math.sqrt(2.0 / n))
    df = 2 * n - 2
    return _result(t, df, t_sf_log(t, df), alpha)


def welch_t_test(
    mean1: float,
    std1: float,
    n1: int,
    mean2: float,
    std2: float,
    n2: int,
    alpha: float = 0.001,
    alternative: str = "one-sided",
) -> TTestResult:
    """Welch's unequal-variance t-test from summary statistics.

    alternative:
      * "one-sided"  upper tail in the direction of the observed
                     difference, i.e. sf(|t|)  (default)
      * "greater"    H1: mean1 > mean2, p = sf(t)
      * "less"       H1: mean1 < mean2, p = sf(-t)
      * "two-sided"  2 * sf(|t|)

    With equal stds and equal n the Welch degrees of freedom reduce to
    the pooled value n1 + n2 - 2.
    """
    if std1 <= 0 or std2 <= 0:
        raise ValueError("stds must be positive")
    if n1 < 2 or n2 < 2:
        raise ValueError("sample sizes must be >= 2")
    v1, v2 = std1 ** 2 / n1, std2 ** 2 / n2
    se = math.sqrt(v1 + v2)
    t = (mean1 - mean2) / se
    df = (v1 + v2) ** 2 / (v1 ** 2 / (n1 - 1) + v2 ** 2 / (n2 - 1))
    if alternative == "one-sided":
        log10_p = t_sf_log(abs(t), df)
    elif alternative == "greater":
        log10_p = t_sf_log(t, df)
    elif alternative == "less":
        log10_p = t_sf_log(-t, df)
    elif alternative == "two-sided":
        log10_p = min(0.0, math.log10(2.0) + t_sf_log(abs(t), df))
    else:
        raise ValueError(f"unknown alternative {alternative!r}")
    return _result(t, df, log10_p, alpha)


def linregress(x, y) -> RegressionResult:
    """Ordinary least squares with intercept; R^2 = 1 - SSres/SStot."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("x and y must be equal-length 1-d arrays, length >= 2")
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise ValueError("x values are degenerate (no spread)")
    sxy = float(np.sum((x - x.mean()) * (y - y.mean())))
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    sstot = float(np.sum((y - y.mean()) ** 2))
    ssres = sstot - slope * sxy
    r2 = 1.0 if sstot == 0.0 else 1.0 - ssres / sstot
    return RegressionResult(slope=slope, intercept=intercept, r_squared=r2)


def linregress_summary(x, means, stds, n: int) -> RegressionResult:
    """OLS through n replicate points per x, given per-group mean and std.

    Equivalent to regressing through the full n*len(x) point cloud: with a
    balanced design the slope depends only on the group means, while the
    total sum of squares picks up the within-group variance,
    SStot = sum_w [ n*(mean_w - ybar)^2 + (n-1)*std_w^2 ].
    """
    x = np.asarray(x, dtype=float)
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    if not (x.shape == means.shape == stds.shape) or len(x) < 2:
        raise ValueError("x, means, stds must be equal-length, length >= 2")
    if n < 2:
        raise ValueError("n must be >= 2")
    sxx = float(np.sum((x - x.mean()) ** 2)) * n
    if sxx == 0.0:
        raise ValueError("x values are degenerate (no spread)")
    sxy = float(np.sum((x - x.mean()) * (means - means.mean()))) * n
    slope = sxy / sxx
    intercept = float(means.mean() - slope * x.mean())
    ssreg = slope * sxy
    sstot = float(np.sum(n * (means - means.mean()) ** 2 + (n - 1) * stds ** 2))
    r2 = 1.0 if sstot == 0.0 else ssreg / sstot
    return RegressionResult(slope=slope, intercept=intercept, r_squared=r2)

"""Scalar special functions and the seeding contract used across the package.

Everything here is deterministic, pure, and double precision. The Student-t
quantile goes through an inverse regularized incomplete beta computed with a
continued fraction plus Newton refinement; degrees of freedom may be any real
number above the stated domain bound, not just integers.

The t-distribution is used in its *unit-variance* parameterization: the
standard quantile scaled by sqrt((d - 2) / d), which requires d > 2.
"""

from __future__ import annotations

import math

import numpy as np

_SQRT2 = math.sqrt(2.0)
_MAX_NEWTON = 200


def std_normal_cdf(x: float) -> float:
    """CDF of the standard normal distribution."""
    if not math.isfinite(x):
        raise ValueError(f"std_normal_cdf requires finite x, got {x!r}")
    return 0.5 * math.erfc(-x / _SQRT2)


def std_normal_tail(x: float) -> float:
    """Upper tail P(Z > x), accurate for large x where 1 - cdf cancels."""
    if not math.isfinite(x):
        raise ValueError(f"std_normal_tail requires finite x, got {x!r}")
    return 0.5 * math.erfc(x / _SQRT2)


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


# Acklam's rational approximation for the normal quantile, polished below
# with one Halley step, which brings the error near machine precision.
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


def std_normal_quantile(p: float) -> float:
    """Inverse of std_normal_cdf on (0, 1)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"std_normal_quantile requires 0 < p < 1, got {p!r}")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low, p_high = 0.02425, 1.0 - 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    # One Halley step against the exact CDF.
    err = std_normal_cdf(x) - p
    u = err / std_normal_pdf(x)
    x -= u / (1.0 + 0.5 * x * u)
    return x


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    eps = 1e-16
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("incomplete beta requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def inverse_incomplete_beta(a: float, b: float, p: float) -> float:
    """Solve I_x(a, b) = p for x, to 1e-12 relative accuracy.

    Newton iteration with a maintained bracket; falls back to bisection
    whenever a Newton step leaves the bracket or stalls.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("inverse incomplete beta requires a, b > 0")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"inverse incomplete beta requires p in [0, 1], got {p!r}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0

    ln_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)

    # Initial guess: normal approximation (good for moderate a, b), else a
    # power-law guess from the x -> 0 / x -> 1 behavior of I_x.
    try:
        y = std_normal_quantile(p)
        al = 1.0 / (2.0 * a - 1.0)
        be = 1.0 / (2.0 * b - 1.0)
        h = 2.0 / (al + be)
        w = y * math.sqrt(h + (y * y - 3.0) / 6.0) / h - \
            (be - al) * ((y * y - 3.0) / 6.0 + 5.0 / 6.0 - 2.0 / (3.0 * h))
        x = a / (a + b * math.exp(2.0 * w))
    except (ValueError, OverflowError, ZeroDivisionError):
        x = 0.5
    if not (0.0 < x < 1.0) or a <= 0.5 or b <= 0.5:
        t = math.exp((math.log(a * p) + ln_beta) / a)
        if t < 0.9:
            x = t
        else:
            t = math.exp((math.log(b * (1.0 - p)) + ln_beta) / b)
            x = 1.0 - t if t < 0.9 else 0.5
        x = min(max(x, 1e-300), 1.0 - 1e-16)

    lo, hi = 0.0, 1.0
    for _ in range(_MAX_NEWTON):
        f = regularized_incomplete_beta(a, b, x) - p
        if f > 0.0:
            hi = x
        else:
            lo = x
        ln_pdf = (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - ln_beta
        step_ok = ln_pdf > -700.0
        if step_ok:
            dx = f / math.exp(ln_pdf)
            x_new = x - dx
        if not step_ok or not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-12 * max(abs(x_new), 1e-300):
            return x_new
        x = x_new
    return x


def student_t_quantile(p: float, d: float) -> float:
    """Quantile of the standard Student-t distribution with d > 0 dof."""
    if d <= 0.0:
        raise ValueError(f"student_t_quantile requires d > 0, got {d!r}")
    if not (0.0 < p < 1.0):
        raise ValueError(f"student_t_quantile requires 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    return math.copysign(student_t_upper_quantile(min(p, 1.0 - p), d), p - 0.5)


def student_t_upper_quantile(tail: float, d: float) -> float:
    """Standard-t quantile at probability 1 - tail, given the tail mass.

    Taking the tail directly stays accurate when 1 - tail rounds to 1 in
    double precision. tail must lie in [0, 0.5]; tail == 0 gives +inf.
    """
    if d <= 0.0:
        raise ValueError(f"student_t_upper_quantile requires d > 0, got {d!r}")
    if not (0.0 <= tail <= 0.5):
        raise ValueError(f"tail must be in [0, 0.5], got {tail!r}")
    if tail == 0.0:
        return math.inf
    if tail == 0.5:
        return 0.0
    if d > 1e8:
        # normal limit; quantile error is O(1/d), below double precision needs
        return -std_normal_quantile(tail)
    if tail > 0.125:
        y = inverse_incomplete_beta(0.5, 0.5 * d, 1.0 - 2.0 * tail)
        if y >= 1.0:
            return math.inf
        return math.sqrt(d * y / (1.0 - y))
    z = inverse_incomplete_beta(0.5 * d, 0.5, 2.0 * tail)
    if z <= 0.0:
        return math.inf
    return math.sqrt(d * (1.0 - z) / z)


def unit_variance_t_quantile(p: float, d: float) -> float:
    """Quantile of the Student-t distribution rescaled to unit variance.

    Equals sqrt((d - 2) / d) times the standard t quantile; requires d > 2
    so that the variance exists.
    """
    if d <= 2.0:
        raise ValueError(f"unit-variance t requires d > 2, got {d!r}")
    if not (0.0 < p < 1.0):
        raise ValueError(f"unit_variance_t_quantile requires 0 < p < 1, got {p!r}")
    return math.sqrt((d - 2.0) / d) * student_t_quantile(p, d)


def unit_variance_t_upper_quantile(tail: float, d: float) -> float:
    """Unit-variance t quantile at probability 1 - tail."""
    if d <= 2.0:
        raise ValueError(f"unit-variance t requires d > 2, got {d!r}")
    return math.sqrt((d - 2.0) / d) * student_t_upper_quantile(tail, d)


def unit_variance_t_density(u: float, d: float) -> float:
    """Density of the unit-variance Student-t distribution, d > 2."""
    if d <= 2.0:
        raise ValueError(f"unit-variance t requires d > 2, got {d!r}")
    c = math.exp(math.lgamma(0.5 * (d + 1.0)) - math.lgamma(0.5 * d)) / \
        math.sqrt((d - 2.0) * math.pi)
    return c * (1.0 + u * u / (d - 2.0)) ** (-0.5 * (d + 1.0))


def replicate_streams(seed, n: int) -> list[np.random.Generator]:
    """Independent per-replicate generators derived from one seed.

    Stream b is a deterministic function of (seed, b) alone, so draws are
    identical whether replicates advance serially or in parallel. seed may be
    an int or a tuple of ints.
    """
    root = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in root.spawn(n)]

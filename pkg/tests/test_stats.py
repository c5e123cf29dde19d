import math
import random

import mpmath
import pytest

from tilinglab.factor import InputError
from tilinglab.stats import binomial_interval_prob, chernoff_bound, normal_cdf


def mp_binomial_interval(n: int, p: float, lo: int, hi: int) -> float:
    """High-precision reference via mpmath (50 digits)."""
    with mpmath.workdps(50):
        pp = mpmath.mpf(p)
        total = mpmath.mpf(0)
        for k in range(lo, hi + 1):
            total += mpmath.binomial(n, k) * pp ** k * (1 - pp) ** (n - k)
        return float(total)


def test_binomial_validation():
    with pytest.raises(InputError):
        binomial_interval_prob(10, 0.5, 5, 3)
    with pytest.raises(InputError):
        binomial_interval_prob(10, 1.5, 0, 10)


def test_binomial_exact_small_cases():
    assert binomial_interval_prob(1, 0.5, 0, 1) == 1.0
    assert abs(binomial_interval_prob(2, 0.5, 1, 1) - 0.5) < 1e-15
    assert abs(binomial_interval_prob(4, 0.5, 2, 2) - 6 / 16) < 1e-15
    assert binomial_interval_prob(5, 0.0, 0, 0) == 1.0
    assert binomial_interval_prob(5, 1.0, 5, 5) == 1.0
    assert binomial_interval_prob(5, 1.0, 0, 4) == 0.0


def test_binomial_matches_mpmath_reference():
    rng = random.Random("stats-reference")
    for _ in range(60):
        n = rng.randrange(1, 900)
        p = rng.choice([0.1, 0.25, 0.5, 0.75, 0.9])
        lo = rng.randrange(0, n + 1)
        hi = rng.randrange(lo, n + 1)
        got = binomial_interval_prob(n, p, lo, hi)
        want = mp_binomial_interval(n, p, lo, hi)
        assert abs(got - want) <= 1e-12, (n, p, lo, hi, got, want)


def test_normal_cdf_reference_points():
    assert normal_cdf(0.0) == 0.5
    assert abs(normal_cdf(2.0) - 0.9772498680518208) < 1e-5
    assert normal_cdf(8.0) >= 1.0 - 1e-15
    assert normal_cdf(-8.0) <= 1e-15
    # symmetry
    for z in (0.3, 1.1, 2.5):
        assert abs(normal_cdf(z) + normal_cdf(-z) - 1.0) < 1e-15


def test_chernoff_reference_values():
    assert abs(chernoff_bound(100.0, 1.0) - 2.0 * math.exp(-100.0 / 3.0)) < 1e-18
    assert abs(chernoff_bound(45.0, 0.5) - 2.0 * math.exp(-4.5)) < 1e-15
    with pytest.raises(InputError):
        chernoff_bound(0.0, 1.0)
    with pytest.raises(InputError):
        chernoff_bound(10.0, -1.0)


def test_chernoff_dominates_exact_binomial_tail():
    # the bound must upper-bound the exact two-sided tail it claims
    n, p = 400, 0.5
    mean = n * p
    for delta in (0.1, 0.2, 0.4):
        lo = math.ceil(mean * (1 - delta))
        hi = math.floor(mean * (1 + delta))
        inside = binomial_interval_prob(n, p, lo, hi)
        # strictly-outside mass; endpoints at exactly delta*mean count as outside
        tail = 1.0 - inside + (
            binomial_interval_prob(n, p, lo, lo) if lo == mean * (1 - delta) else 0.0
        ) + (
            binomial_interval_prob(n, p, hi, hi) if hi == mean * (1 + delta) else 0.0
        )
        assert tail <= chernoff_bound(mean, delta) + 1e-12

"""Binomial interval probabilities, normal CDF, and the Chernoff bound.

Used by the sampling harnesses to justify tolerances and by the interval
checks around the sqrt(n)-window concentration arguments.
"""

from __future__ import annotations

import math

from .factor import InputError


def binomial_interval_prob(n: int, p: float, lo: int, hi: int) -> float:
    """Exact sum_{k=lo}^{hi} C(n,k) p^k (1-p)^(n-k).

    Stable summation: exact integer binomials with log-space fallback for
    large n; terms are accumulated with math.fsum.
    """
    if not (0 <= lo <= hi <= n):
        raise InputError(f"invalid range [{lo},{hi}] for n={n}")
    if not (0.0 <= p <= 1.0):
        raise InputError(f"probability p={p} outside [0,1]")
    q = 1.0 - p
    terms = []
    for k in range(lo, hi + 1):
        if p in (0.0, 1.0):
            terms.append(1.0 if (p == 0.0 and k == 0) or (p == 1.0 and k == n) else 0.0)
        elif n <= 600:
            # comb * p^k first keeps the intermediate in float range
            terms.append(math.comb(n, k) * (p ** k) * (q ** (n - k)))
        else:
            # exact integer binomial; its log is accurate to ~1 ulp, unlike
            # the difference of three lgammas
            lg = (
                math.log(math.comb(n, k))
                + k * math.log(p)
                + (n - k) * math.log(q)
            )
            terms.append(math.exp(lg))
    return min(1.0, math.fsum(terms))


def normal_cdf(z: float) -> float:
    """Standard normal CDF via erf (double-precision accurate)."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def chernoff_bound(mean: float, delta: float) -> float:
    """Tail bound 2*exp(-delta^2 * mean / (2 + delta)) for binomial X with
    EX = mean: P[|X - EX| >= delta*EX] is at most this value."""
    if mean <= 0 or delta <= 0:
        raise InputError("mean and delta must be positive")
    return 2.0 * math.exp(-delta * delta * mean / (2.0 + delta))

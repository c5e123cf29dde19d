"""Counting and estimating how many induced subsets carry a K_r-factor.

Exact mode enumerates all 2^n subsets (clique-cover dynamic program over
bitmask subsets; correctness is order-independent) and always records the
per-size histogram.  Sampled mode draws subsets by independent coin flips
with a per-trial keyed PRNG so runs are reproducible under any schedule.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .factor import FactorResult, InputError, SearchBudget, has_kr_factor
from .graphs import Graph, bits, mask_of

EXACT_ENUMERATION_CEILING = 30
_DP_CEILING = 24  # byte-per-subset table; above this fall back to per-subset search


class EngineUnknownError(RuntimeError):
    """An exact count hit an 'unknown' from the factor engine; raise budget."""


@dataclass
class RobustnessEstimate:
    mode: str  # "exact" | "sampled"
    r: int
    n_vertices: int
    count_with_empty: Optional[int] = None
    count_without_empty: Optional[int] = None
    histogram: Optional[tuple[int, ...]] = None  # index = |S|, exact mode
    trials: Optional[int] = None
    hits: Optional[int] = None
    unknown_trials: Optional[int] = None
    seed: Optional[int] = None
    p: Optional[float] = None

    @property
    def denominator(self) -> int:
        return 1 << self.n_vertices

    @property
    def fraction(self) -> float:
        if self.mode == "exact":
            return self.count_with_empty / self.denominator
        return self.hits / self.trials

    @property
    def exact_fraction(self) -> Fraction:
        if self.mode != "exact":
            raise InputError("exact_fraction only defined in exact mode")
        return Fraction(self.count_with_empty, self.denominator)

    @property
    def std_error(self) -> float:
        if self.mode != "sampled":
            return 0.0
        f = self.fraction
        return math.sqrt(f * (1.0 - f) / self.trials)

    def to_json(self) -> dict:
        out = {
            "mode": self.mode,
            "r": self.r,
            "n_vertices": self.n_vertices,
            "fraction": self.fraction,
            "std_error": self.std_error,
        }
        if self.mode == "exact":
            out.update(
                count_with_empty=self.count_with_empty,
                count_without_empty=self.count_without_empty,
                denominator=self.denominator,
                histogram=list(self.histogram),
            )
        else:
            out.update(
                trials=self.trials,
                hits=self.hits,
                unknown_trials=self.unknown_trials,
                seed=self.seed,
                p=self.p,
            )
        return out


@dataclass
class SamplingConfig:
    p: float = 0.5
    trials: int = 10_000
    seed: int = 0
    budget_per_trial: Optional[SearchBudget] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise InputError("vertex-inclusion probability must lie in (0,1)")
        if self.trials < 1:
            raise InputError("need at least one trial")


def _cliques_by_min_vertex(g: Graph, r: int) -> list[list[int]]:
    """For each vertex v: bitmasks of the r-cliques whose minimum vertex is v."""
    out: list[list[int]] = [[] for _ in range(g.n)]
    adj = g.adj

    def extend(first: int, picked_mask: int, pool: int, depth: int) -> None:
        if depth == r:
            out[first].append(picked_mask)
            return
        for v in bits(pool):
            extend(first, picked_mask | (1 << v), pool & adj[v] & ~((1 << (v + 1)) - 1), depth + 1)

    for v in range(g.n):
        extend(v, 1 << v, adj[v] & ~((1 << (v + 1)) - 1), 1)
    return out


def _good_subset_table(g: Graph, r: int) -> bytearray:
    """byte-per-subset table: good[S] == 1 iff G[S] has a K_r-factor.

    Clique-cover dynamic program: S is good iff some r-clique containing
    min(S) lies in S with a good remainder.
    """
    good = bytearray(1 << g.n)
    good[0] = 1
    cliques = _cliques_by_min_vertex(g, r)
    for s in range(1, 1 << g.n):
        v = (s & -s).bit_length() - 1
        for cm in cliques[v]:
            if cm & s == cm and good[s ^ cm]:
                good[s] = 1
                break
    return good


def count_factor_subsets(
    g: Graph,
    r: int,
    budget: Optional[SearchBudget] = None,
    ceiling: int = EXACT_ENUMERATION_CEILING,
) -> RobustnessEstimate:
    """Exact count of subsets S with a K_r-factor in G[S].

    The empty set counts as having a vacuous factor; the count excluding it
    is reported alongside.  Refuses graphs above the enumeration ceiling.
    """
    if r < 2:
        raise InputError("r must be at least 2")
    if g.n > ceiling:
        raise InputError(
            f"graph has {g.n} > {ceiling} vertices; use estimate_factor_probability"
        )
    n = g.n
    histogram = [0] * (n + 1)
    if n <= _DP_CEILING:
        good = _good_subset_table(g, r)
        count = 0
        for s in range(1 << n):
            if good[s]:
                count += 1
                histogram[s.bit_count()] += 1
    else:
        budget = budget or SearchBudget()
        count = 0
        for s in range(1 << n):
            if s.bit_count() % r:
                continue
            sub, _ = g.induced_subgraph(s)
            res = has_kr_factor(sub, r, budget)
            if res.exists is None:
                raise EngineUnknownError(
                    f"subset {s:#x} exhausted the budget; raise max_nodes/deadline"
                )
            if res.exists:
                count += 1
                histogram[s.bit_count()] += 1
    return RobustnessEstimate(
        mode="exact",
        r=r,
        n_vertices=n,
        count_with_empty=count,
        count_without_empty=count - 1,
        histogram=tuple(histogram),
    )


def _trial_subset(n: int, p: float, seed: int, trial: int) -> int:
    """Deterministic per-trial subset draw, keyed by (seed, trial)."""
    rng = random.Random(f"{seed}:{trial}")
    m = 0
    for v in range(n):
        if rng.random() < p:
            m |= 1 << v
    return m


def estimate_factor_probability(
    g: Graph, r: int, cfg: SamplingConfig
) -> RobustnessEstimate:
    """Monte Carlo estimate of P[G[p] has a K_r-factor].

    Trials whose engine result is unknown are counted separately, never
    silently dropped.
    """
    if r < 2:
        raise InputError("r must be at least 2")
    budget = cfg.budget_per_trial or SearchBudget()
    hits = 0
    unknown = 0
    table = _good_subset_table(g, r) if g.n <= _DP_CEILING else None
    for t in range(cfg.trials):
        subset = _trial_subset(g.n, cfg.p, cfg.seed, t)
        if table is not None:
            if table[subset]:
                hits += 1
            continue
        sub, _ = g.induced_subgraph(subset)
        res: FactorResult = has_kr_factor(sub, r, budget)
        if res.exists is None:
            unknown += 1
        elif res.exists:
            hits += 1
    return RobustnessEstimate(
        mode="sampled",
        r=r,
        n_vertices=g.n,
        trials=cfg.trials,
        hits=hits,
        unknown_trials=unknown,
        seed=cfg.seed,
        p=cfg.p,
    )

"""Sparse-set detection, vertex classification, and good-partition machinery.

A partition {A_1,...,A_s,B} of an rn-vertex graph is "good" for parameters
(alpha, beta, beta', gamma) when seven conditions hold:

  A1  |A_i| <= n + alpha*n;  (r-s)n - r*alpha*n <= |B| <= (r-s)n + r*alpha*n
  A2  large A_i (>n): max degree inside <= beta'*n and matching number
      >= |A_i| - n + r;  exact-size A_i (=n): G[A_i] is not empty
  A3  at least |A_i| - 2*alpha*n vertices of A_i are (alpha^(1/5), A_i)-good
  A4  every v outside A_i has d(v, A_i) >= beta*n
  A5  every v outside B has d(v, B) >= beta*n, and
      min degree of G[B] >= (r-s-1)n - r*alpha*n
  A6  at most r*alpha*n vertices of B are (alpha^(1/5), B)-exceptional
  A7  B has no gamma-independent set of size ceil(|B|/(r-s))

Vertex classification thresholds (for a partition class C and scale n):
good:     v in C with d(v, C) <= alpha*n;
bad:      v outside C with d(v, C) <= alpha*n;
exceptional: v in C with d(v, C') <= |C'| - alpha*n for some other class C'.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .factor import InputError, SearchBudget
from .graphs import Graph, LabeledPartition, bits, mask_of
from .matching import matching_number

EXACT_SPARSE_CEILING = 24  # exhaustive C(n, size) enumeration up to this n


@dataclass(frozen=True)
class PartitionParams:
    alpha: float
    beta: float
    beta_prime: float
    gamma: float
    n: int
    r: int

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "beta_prime", "gamma"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InputError(f"{name}={v} must lie in (0,1)")
        if self.n < 1 or self.r < 2:
            raise InputError("need n >= 1 and r >= 2")

    @property
    def good_threshold(self) -> float:
        """alpha^(1/5) * n, the threshold used by conditions A3/A6."""
        return (self.alpha ** 0.2) * self.n

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "beta_prime": self.beta_prime,
            "gamma": self.gamma,
            "n": self.n,
            "r": self.r,
        }


@dataclass
class SparseSetResult:
    subset: int  # bitmask in the host graph's ids
    edges_inside: int
    is_exact: bool


def min_edges_subset(
    g: Graph,
    size: int,
    budget: Optional[SearchBudget] = None,
    exact_ceiling: int = EXACT_SPARSE_CEILING,
) -> SparseSetResult:
    """The size-`size` subset minimizing internal edges.

    Exact by full enumeration when |V| <= exact_ceiling, otherwise greedy
    min-degree seeding plus local-search swaps (a valid upper bound with
    is_exact=False).
    """
    if size > g.n:
        raise InputError(f"size {size} exceeds |V|={g.n}")
    if size == 0:
        return SparseSetResult(0, 0, True)
    if g.n <= exact_ceiling:
        best_mask, best_edges = None, None
        for combo in itertools.combinations(range(g.n), size):
            m = mask_of(combo)
            e = g.edges_inside(m)
            if best_edges is None or e < best_edges:
                best_mask, best_edges = m, e
                if e == 0:
                    break
        return SparseSetResult(best_mask, best_edges, True)
    # heuristic: take vertices greedily by degree into the current pick
    order = sorted(range(g.n), key=lambda v: (g.degree(v), v))
    pick = 0
    for v in order:
        if pick.bit_count() == size:
            break
        pick |= 1 << v
    improved = True
    while improved:
        improved = False
        current = g.edges_inside(pick)
        for v in list(bits(pick)):
            for u in bits(g.full_mask & ~pick):
                cand = (pick & ~(1 << v)) | (1 << u)
                if g.edges_inside(cand) < current:
                    pick = cand
                    improved = True
                    break
            if improved:
                break
    return SparseSetResult(pick, g.edges_inside(pick), False)


@dataclass
class GammaIndependentResult:
    found: Optional[bool]  # tri-state: None = unknown (heuristic inconclusive)
    witness: Optional[int]
    min_edges: Optional[int]
    threshold: float


def has_gamma_independent_set(
    g: Graph,
    size: int,
    gamma: float,
    n_scale: int,
    budget: Optional[SearchBudget] = None,
) -> GammaIndependentResult:
    """Is there an S with |S|=size and e(G[S]) <= gamma * n_scale^2?

    False only when the underlying minimization was exact; otherwise a
    failed heuristic search reports unknown.
    """
    threshold = gamma * n_scale * n_scale
    res = min_edges_subset(g, size, budget)
    if res.edges_inside <= threshold:
        return GammaIndependentResult(True, res.subset, res.edges_inside, threshold)
    if res.is_exact:
        return GammaIndependentResult(False, None, res.edges_inside, threshold)
    return GammaIndependentResult(None, None, res.edges_inside, threshold)


@dataclass
class VertexClassification:
    """Per-class good/bad/exceptional bitmasks at a single alpha threshold."""

    threshold: float  # the degree cut alpha*n actually used
    good: tuple[int, ...]  # good[i]: vertices of class i good for class i
    bad: tuple[int, ...]  # bad[i]: vertices outside class i bad for class i
    exceptional: tuple[int, ...]  # exceptional[i]: vertices of class i


def classify_vertices(
    g: Graph, p: LabeledPartition, alpha: float, n_scale: int
) -> VertexClassification:
    """Raw classification per the degree-threshold definitions.

    Callers wanting the A3/A6 flavor pass alpha**(1/5) themselves (see
    PartitionParams.good_threshold).
    """
    cut = alpha * n_scale
    classes = p.all_classes
    ground = p.ground_mask()
    good, bad, exceptional = [], [], []
    for i, ci in enumerate(classes):
        g_mask = b_mask = e_mask = 0
        for v in bits(ci):
            if g.degree_into(v, ci) <= cut:
                g_mask |= 1 << v
            for j, cj in enumerate(classes):
                if j != i and g.degree_into(v, cj) <= cj.bit_count() - cut:
                    e_mask |= 1 << v
                    break
        for v in bits(ground & ~ci):
            if g.degree_into(v, ci) <= cut:
                b_mask |= 1 << v
        good.append(g_mask)
        bad.append(b_mask)
        exceptional.append(e_mask)
    return VertexClassification(cut, tuple(good), tuple(bad), tuple(exceptional))


@dataclass
class ConditionVerdict:
    condition: str
    passed: Optional[bool]  # None = inconclusive (A7 heuristic unknown)
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        out = {"condition": self.condition, "pass": self.passed}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class GoodPartitionReport:
    verdicts: list[ConditionVerdict]
    params: PartitionParams

    @property
    def is_good(self) -> bool:
        return all(v.passed is True for v in self.verdicts)

    @property
    def inconclusive(self) -> bool:
        return any(v.passed is None for v in self.verdicts)

    def verdict(self, condition: str) -> ConditionVerdict:
        for v in self.verdicts:
            if v.condition == condition:
                return v
        raise KeyError(condition)

    def failing(self) -> list[str]:
        return [v.condition for v in self.verdicts if v.passed is not True]

    def to_json(self) -> dict:
        return {
            "conditions": [v.to_json() for v in self.verdicts],
            "is_good": self.is_good,
            "inconclusive": self.inconclusive,
            "params": self.params.to_json(),
        }


def verify_good_partition(
    g: Graph,
    p: LabeledPartition,
    params: PartitionParams,
    budget: Optional[SearchBudget] = None,
) -> GoodPartitionReport:
    """Check conditions A1..A7 with explicit witnesses for failures."""
    p.validate(g.full_mask)
    n, r, s = params.n, params.r, p.s
    if p.b is None:
        raise InputError("verify_good_partition expects an explicit B class (may be empty)")
    b_mask = p.b
    b_size = b_mask.bit_count()
    verdicts: list[ConditionVerdict] = []

    # A1: class size windows
    a1_witness = None
    for i, ci in enumerate(p.a_classes):
        if ci.bit_count() > n + params.alpha * n:
            a1_witness = {"class": f"A_{i+1}", "value": ci.bit_count(),
                          "threshold": n + params.alpha * n}
            break
    if a1_witness is None:
        lo = (r - s) * n - r * params.alpha * n
        hi = (r - s) * n + r * params.alpha * n
        if not lo <= b_size <= hi:
            a1_witness = {"class": "B", "value": b_size, "threshold": [lo, hi]}
    verdicts.append(ConditionVerdict("A1", a1_witness is None, a1_witness))

    # A2: large-part degree cap and matching supply; exact parts non-empty
    a2_witness = None
    for i, ci in enumerate(p.a_classes):
        sub, _ = g.induced_subgraph(ci)
        size = ci.bit_count()
        if size > n:
            if sub.max_degree() > params.beta_prime * n:
                a2_witness = {"class": f"A_{i+1}", "value": sub.max_degree(),
                              "threshold": params.beta_prime * n, "check": "max_degree"}
                break
            need = size - n + r
            mn = matching_number(sub)
            if mn < need:
                a2_witness = {"class": f"A_{i+1}", "value": mn,
                              "threshold": need, "check": "matching_number"}
                break
        elif size == n and sub.edge_count() == 0:
            a2_witness = {"class": f"A_{i+1}", "value": 0,
                          "threshold": 1, "check": "not_empty"}
            break
    verdicts.append(ConditionVerdict("A2", a2_witness is None, a2_witness))

    # A3: density of good vertices at threshold alpha^(1/5) n
    cls = classify_vertices(g, p, params.alpha ** 0.2, n)
    a3_witness = None
    for i, ci in enumerate(p.a_classes):
        ngood = (cls.good[i] & ci).bit_count()
        need = ci.bit_count() - 2 * params.alpha * n
        if ngood < need:
            a3_witness = {"class": f"A_{i+1}", "value": ngood, "threshold": need}
            break
    verdicts.append(ConditionVerdict("A3", a3_witness is None, a3_witness))

    # A4: cross-degree floor into each A_i
    a4_witness = None
    for i, ci in enumerate(p.a_classes):
        for v in bits(g.full_mask & ~ci):
            d = g.degree_into(v, ci)
            if d < params.beta * n:
                a4_witness = {"vertex": v, "class": f"A_{i+1}", "value": d,
                              "threshold": params.beta * n}
                break
        if a4_witness:
            break
    verdicts.append(ConditionVerdict("A4", a4_witness is None, a4_witness))

    # A5: degree into B plus min degree inside B
    a5_witness = None
    if s < r:
        for v in bits(g.full_mask & ~b_mask):
            d = g.degree_into(v, b_mask)
            if d < params.beta * n:
                a5_witness = {"vertex": v, "class": "B", "value": d,
                              "threshold": params.beta * n}
                break
        if a5_witness is None and b_size:
            floor = (r - s - 1) * n - r * params.alpha * n
            for v in bits(b_mask):
                d = g.degree_into(v, b_mask)
                if d < floor:
                    a5_witness = {"vertex": v, "class": "B", "value": d,
                                  "threshold": floor, "check": "delta_G[B]"}
                    break
    verdicts.append(ConditionVerdict("A5", a5_witness is None, a5_witness))

    # A6: scarcity of exceptional vertices in B
    nexc = (cls.exceptional[s] & b_mask).bit_count() if s < r else 0
    a6_ok = nexc <= r * params.alpha * n
    a6_witness = None if a6_ok else {
        "class": "B", "value": nexc, "threshold": r * params.alpha * n}
    verdicts.append(ConditionVerdict("A6", a6_ok, a6_witness))

    # A7: no gamma-independent set in B of size ceil(|B|/(r-s))
    if s == r or b_size == 0:
        verdicts.append(ConditionVerdict("A7", True, None))
    else:
        gb, remap = g.induced_subgraph(b_mask)
        want = -(-b_size // (r - s))  # ceil
        res = has_gamma_independent_set(gb, want, params.gamma, n, budget)
        if res.found is True:
            witness_old = mask_of(remap[v] for v in bits(res.witness))
            verdicts.append(ConditionVerdict("A7", False, {
                "class": "B", "set": sorted(bits(witness_old)),
                "value": res.min_edges, "threshold": res.threshold}))
        elif res.found is False:
            verdicts.append(ConditionVerdict("A7", True, None))
        else:
            verdicts.append(ConditionVerdict("A7", None, {
                "class": "B", "value": res.min_edges, "threshold": res.threshold,
                "note": "heuristic sparse-set search inconclusive"}))
    return GoodPartitionReport(verdicts, params)


@dataclass
class BuildOutcome:
    partition: Optional[LabeledPartition]
    report: Optional[GoodPartitionReport]
    failure: Optional[str]  # named failing phase/claim when partition is None


def default_gamma_schedule(gamma: float, r: int) -> list[float]:
    """Escalating schedule gamma_i = gamma * 10^i, clipped below 1."""
    return [min(0.99, gamma * (10 ** i)) for i in range(1, r + 1)]


def build_good_partition(
    g: Graph,
    params: PartitionParams,
    gamma_schedule: Optional[list[float]] = None,
    budget: Optional[SearchBudget] = None,
) -> BuildOutcome:
    """Three-phase construction: sparse-set extraction, bad-vertex
    relocation, large-part degree cleaning; self-certifies via
    verify_good_partition.
    """
    n, r = params.n, params.r
    if g.n != r * n:
        raise InputError(f"|V|={g.n} is not r*n={r * n}")
    schedule = gamma_schedule or default_gamma_schedule(params.gamma, r)

    # Phase 1: greedy maximal family of disjoint sparse n-sets
    remaining = g.full_mask
    a_classes: list[int] = []
    for gamma_i in schedule:
        if remaining.bit_count() < n:
            break
        sub, remap = g.induced_subgraph(remaining)
        res = min_edges_subset(sub, n, budget)
        if res.edges_inside > gamma_i * n * n:
            if not res.is_exact:
                return BuildOutcome(None, None,
                                    "extraction: sparse-set search inconclusive")
            break
        a_classes.append(mask_of(remap[v] for v in bits(res.subset)))
        remaining &= ~a_classes[-1]
    if not a_classes:
        return BuildOutcome(None, None, "extraction: no sparse n-set found")
    s = len(a_classes)
    b_mask = remaining

    # Phase 2: move (2*beta, D)-bad vertices into D (class order, id order)
    classes = a_classes + [b_mask]
    two_beta_cut = 2 * params.beta * n
    for i in range(len(classes)):
        target = classes[i]
        if not target:
            continue
        movers = []
        for v in bits(g.full_mask & ~target):
            if g.degree_into(v, target) <= two_beta_cut:
                movers.append(v)
        for v in movers:
            src = next(j for j, c in enumerate(classes) if c >> v & 1)
            if src == i:
                continue
            classes[src] &= ~(1 << v)
            classes[i] |= 1 << v

    # Phase 3: drain high-degree vertices out of oversized A parts
    quota_b = (r - s) * n
    guard = 4 * g.n * g.n
    while guard:
        guard -= 1
        moved = False
        for i in range(s):
            ci = classes[i]
            if ci.bit_count() <= n:
                continue
            mover = None
            for v in bits(ci):
                if g.degree_into(v, ci) >= params.beta * n:
                    mover = v
                    break
            if mover is None:
                continue
            dests = [j for j in range(s) if j != i and classes[j].bit_count() < n]
            dest = min(dests, key=lambda j: (classes[j].bit_count(), j), default=None)
            if dest is None and classes[s].bit_count() < quota_b:
                dest = s
            if dest is None:
                break
            classes[i] &= ~(1 << mover)
            classes[dest] |= 1 << mover
            moved = True
        if not moved:
            break

    partition = LabeledPartition(tuple(classes[:s]), classes[s])
    report = verify_good_partition(g, partition, params, budget)
    if report.is_good:
        return BuildOutcome(partition, report, None)
    return BuildOutcome(partition, report,
                        f"verification: conditions {report.failing()} failed")

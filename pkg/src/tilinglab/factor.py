"""Exact clique-factor machinery.

Decision and construction of K_r-factors, transversal multipartite factors,
minimum vertex covers, and clique tilings.  Everything here is exact search
under an explicit node/time budget; timeouts surface as a tri-state
"unknown" rather than a silent best-effort answer.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .graphs import (
    Graph,
    GraphError,
    LabeledPartition,
    Tiling,
    bits,
    index_vector,
    is_perfect_factor,
    mask_of,
)
from .matching import maximum_matching


class InputError(ValueError):
    """Invalid caller input (distinct from a search that merely fails)."""


@dataclass
class SearchBudget:
    max_nodes: int = 20_000_000
    deadline: float = 120.0  # wall-clock seconds

    def __post_init__(self) -> None:
        if self.max_nodes <= 0 or self.deadline <= 0:
            raise InputError("budget bounds must be positive")

    def start(self) -> "_Tracker":
        return _Tracker(self)


class BudgetExceeded(Exception):
    pass


@dataclass
class _Tracker:
    budget: SearchBudget
    nodes: int = 0
    t0: float = field(default_factory=time.monotonic)

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise BudgetExceeded()
        if not self.nodes % 4096 and time.monotonic() - self.t0 > self.budget.deadline:
            raise BudgetExceeded()


@dataclass
class FactorResult:
    """Tri-state factor decision: exists is True, False, or None (unknown)."""

    exists: Optional[bool]
    factor: Optional[Tiling]
    nodes_explored: int
    timed_out: bool

    def to_json(self) -> dict:
        return {
            "exists": {True: "true", False: "false", None: "unknown"}[self.exists],
            "factor": None if self.factor is None else self.factor.to_json(),
            "nodes_explored": self.nodes_explored,
            "timed_out": self.timed_out,
        }


def has_kr_factor(g: Graph, r: int, budget: Optional[SearchBudget] = None) -> FactorResult:
    """Exact K_r-factor decision with certificate.

    r=2 goes through the blossom matching and never times out.  Search order
    for r>=3: repeatedly pick the uncovered vertex of minimum remaining
    degree and enumerate its K_{r-1} extensions lexicographically.
    """
    if r < 2:
        raise InputError("r must be at least 2")
    if g.n == 0:
        return FactorResult(True, Tiling(()), 0, False)
    if g.n % r:
        return FactorResult(False, None, 0, False)
    if r == 2:
        m = maximum_matching(g)
        if 2 * m.size() == g.n:
            return FactorResult(True, m, 0, False)
        return FactorResult(False, None, 0, False)

    budget = budget or SearchBudget()
    tracker = budget.start()
    adj = g.adj
    chosen: list[tuple[int, ...]] = []

    def search(uncovered: int) -> bool:
        tracker.tick()
        if not uncovered:
            return True
        # fail-first: vertex of minimum remaining degree
        best_v, best_deg = -1, r
        for v in bits(uncovered):
            d = (adj[v] & uncovered).bit_count()
            if d < best_deg or best_v < 0:
                best_v, best_deg = v, d
                if d < r - 1:
                    return False
        v = best_v
        cand = adj[v] & uncovered
        stack_vs: list[int] = []

        def extend(pool: int) -> bool:
            if len(stack_vs) == r - 1:
                clique = (v, *stack_vs)
                chosen.append(tuple(sorted(clique)))
                if search(uncovered & ~mask_of(clique)):
                    return True
                chosen.pop()
                return False
            for u in bits(pool):
                stack_vs.append(u)
                if extend(pool & adj[u] & ~((1 << (u + 1)) - 1)):
                    return True
                stack_vs.pop()
            return False

        return extend(cand)

    try:
        if search(g.full_mask):
            factor = Tiling(tuple(chosen))
            factor.validate(g)
            return FactorResult(True, factor, tracker.nodes, False)
        return FactorResult(False, None, tracker.nodes, False)
    except BudgetExceeded:
        return FactorResult(None, None, tracker.nodes, True)


def naive_has_kr_factor(g: Graph, r: int) -> bool:
    """Independent brute-force oracle: enumerate all partitions into r-sets.

    Set-based and heuristics-free on purpose; only for small graphs.
    """
    if r < 2:
        raise InputError("r must be at least 2")
    if g.n % r:
        return g.n == 0

    def recurse(remaining: frozenset) -> bool:
        if not remaining:
            return True
        v = min(remaining)
        others = sorted(remaining - {v})
        for combo in itertools.combinations(others, r - 1):
            group = (v, *combo)
            ok = True
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    if not g.has_edge(a, b):
                        ok = False
                        break
                if not ok:
                    break
            if ok and recurse(remaining - set(group)):
                return True
        return False

    return recurse(frozenset(range(g.n)))


@dataclass
class VertexCoverResult:
    cover: int  # bitmask
    exact: bool
    nodes_explored: int

    def size(self) -> int:
        return self.cover.bit_count()


EXACT_COVER_CEILING = 40


def min_vertex_cover(g: Graph, budget: Optional[SearchBudget] = None) -> VertexCoverResult:
    """Minimum vertex cover by branch-and-bound on the matching lower bound.

    Exact for graphs up to EXACT_COVER_CEILING vertices (or whenever the
    budget allows completion); on timeout the best-known cover is returned
    with exact=False.
    """
    budget = budget or SearchBudget()
    tracker = budget.start()
    adj = g.adj

    # greedy maximal matching gives the initial upper bound (its vertex set
    # is a cover) and the per-node lower bound
    def greedy_matching_size(active: int) -> int:
        size = 0
        pool = active
        while pool:
            v = (pool & -pool).bit_length() - 1
            pool &= ~(1 << v)
            nb = adj[v] & pool
            if nb:
                u = (nb & -nb).bit_length() - 1
                pool &= ~(1 << u)
                size += 1
        return size

    best_cover = 0
    pool = g.full_mask
    while pool:
        v = (pool & -pool).bit_length() - 1
        pool &= ~(1 << v)
        nb = adj[v] & pool
        if nb:
            u = (nb & -nb).bit_length() - 1
            pool &= ~(1 << u)
            best_cover |= (1 << v) | (1 << u)
    best = [best_cover.bit_count(), best_cover]
    exact = True

    def find_edge(active: int) -> Optional[tuple[int, int]]:
        for v in bits(active):
            nb = adj[v] & active
            if nb:
                return v, (nb & -nb).bit_length() - 1
        return None

    def bnb(active: int, cover: int, size: int) -> None:
        tracker.tick()
        if size + greedy_matching_size(active) >= best[0]:
            return
        edge = find_edge(active)
        if edge is None:
            best[0], best[1] = size, cover
            return
        u, v = edge
        # forced: degree-1 neighbors make taking the other endpoint optimal,
        # but plain two-way branching is exact and simple
        bnb(active & ~(1 << u), cover | (1 << u), size + 1)
        bnb(active & ~(1 << v), cover | (1 << v), size + 1)

    try:
        bnb(g.full_mask, 0, 0)
    except BudgetExceeded:
        exact = False
    return VertexCoverResult(best[1], exact, tracker.nodes)


def multipartite_min_cross_degree(g: Graph, p: LabeledPartition) -> int:
    """min over vertices v and foreign classes C of d(v, C)."""
    out = g.n
    classes = p.all_classes
    for i, ci in enumerate(classes):
        for v in bits(ci):
            for j, cj in enumerate(classes):
                if i != j:
                    out = min(out, g.degree_into(v, cj))
    return out


def multipartite_kr_factor(
    g: Graph, p: LabeledPartition, budget: Optional[SearchBudget] = None
) -> FactorResult:
    """Transversal K_r-factor of an r-partite graph with equal class sizes.

    Only cliques with index vector (1,...,1) are admissible.
    """
    classes = p.all_classes
    r = len(classes)
    sizes = [c.bit_count() for c in classes]
    if len(set(sizes)) != 1:
        raise InputError(f"classes must have equal sizes, got {sizes}")
    ground = p.ground_mask()
    if ground != g.full_mask:
        raise InputError("partition must cover the whole graph")
    if sizes[0] == 0:
        return FactorResult(True, Tiling(()), 0, False)

    budget = budget or SearchBudget()
    tracker = budget.start()
    adj = g.adj
    chosen: list[tuple[int, ...]] = []

    def search(uncovered: int) -> bool:
        tracker.tick()
        if not uncovered:
            return True
        v = ((uncovered & classes[0]) & -(uncovered & classes[0])).bit_length() - 1
        picked = [v]

        def extend(ci: int, common: int) -> bool:
            if ci == r:
                chosen.append(tuple(sorted(picked)))
                if search(uncovered & ~mask_of(picked)):
                    return True
                chosen.pop()
                return False
            for u in bits(common & classes[ci] & uncovered):
                picked.append(u)
                if extend(ci + 1, common & adj[u]):
                    return True
                picked.pop()
            return False

        return extend(1, adj[v])

    try:
        if search(g.full_mask):
            factor = Tiling(tuple(chosen))
            factor.validate(g)
            return FactorResult(True, factor, tracker.nodes, False)
        return FactorResult(False, None, tracker.nodes, False)
    except BudgetExceeded:
        return FactorResult(None, None, tracker.nodes, True)


def find_clique(g: Graph, k: int, allowed: int) -> Optional[tuple[int, ...]]:
    """Lexicographically first k-clique inside the `allowed` mask, or None."""
    if k == 0:
        return ()
    adj = g.adj
    picked: list[int] = []

    def extend(pool: int) -> bool:
        if len(picked) == k:
            return True
        need = k - len(picked)
        if pool.bit_count() < need:
            return False
        for v in bits(pool):
            picked.append(v)
            if extend(pool & adj[v] & ~((1 << (v + 1)) - 1)):
                return True
            picked.pop()
        return False

    if extend(allowed):
        return tuple(picked)
    return None


def greedy_clique_tiling(
    g: Graph, k: int, forbidden: int = 0, want: Optional[int] = None
) -> Tiling:
    """Up to `want` disjoint K_k copies avoiding `forbidden`.

    Greedy per clique with an exact search for each next copy, so a short
    return means no further disjoint copy exists given earlier picks.
    """
    if k < 1:
        raise InputError("k must be at least 1")
    used = forbidden
    cliques: list[tuple[int, ...]] = []
    while want is None or len(cliques) < want:
        c = find_clique(g, k, g.full_mask & ~used)
        if c is None:
            break
        cliques.append(c)
        used |= mask_of(c)
    return Tiling(tuple(cliques))


def extend_clique_with_index_vector(
    g: Graph,
    p: LabeledPartition,
    seed: Sequence[int],
    target: Sequence[int],
    forbidden: int = 0,
    good_only: Optional[Sequence[Optional[int]]] = None,
) -> Optional[tuple[int, ...]]:
    """Grow `seed` into a clique with index vector exactly `target`.

    Non-seed vertices avoid `forbidden` and, when `good_only` is supplied,
    are drawn only from the given per-class masks (None entries mean
    unconstrained).  Exact backtracking: a None return proves no such
    clique exists under the constraints.
    """
    classes = p.all_classes
    if len(target) != len(classes):
        raise InputError("target index vector length != class count")
    seed = tuple(seed)
    current = index_vector(p, seed)
    deficits = [t - c for t, c in zip(target, current)]
    if any(d < 0 for d in deficits):
        return None
    adj = g.adj
    seed_mask = mask_of(seed)
    common = g.full_mask
    for v in seed:
        common &= adj[v]

    picked: list[int] = list(seed)

    def fill(ci: int, remaining: int, common_now: int, used: int) -> bool:
        if remaining == 0:
            if ci + 1 < len(classes):
                return fill(ci + 1, deficits[ci + 1], common_now, used)
            return True
        allowed = common_now & classes[ci] & ~forbidden & ~used
        if good_only is not None and good_only[ci] is not None:
            allowed &= good_only[ci]
        for v in bits(allowed):
            picked.append(v)
            if fill(ci, remaining - 1, common_now & adj[v], used | (1 << v)):
                return True
            picked.pop()
        return False

    if not classes:
        return seed if not any(deficits) else None
    if fill(0, deficits[0], common, seed_mask):
        return tuple(sorted(picked))
    return None

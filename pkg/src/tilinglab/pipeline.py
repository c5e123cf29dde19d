"""Extremal-case factor construction as an inspectable state machine.

Given a graph with a verified good partition {A_1,...,A_s,B}, build a
K_r-factor in stages:

  1. cover every bad or exceptional vertex with disjoint K_r copies (the
     tiling K, split into Q for part vertices and T for B vertices);
  2. fix divisibility of the B remainder with tilings H (skewed K_r
     copies), R (copies through reserved matching edges) and F (plain
     K_{r-s+1} copies kept aside for contraction), tracking an integer
     ledger (q, a, b, q_i, p_i);
  3. tile the final B remainder with K_{r-s} copies, repairing the
     two-odd-components obstruction when r-s = 2;
  4. contract the B tilings to single vertices / edges, producing an
     auxiliary graph G* with an almost balanced (s+1)-class partition;
  5. balance G* by cliques that each consume one matching edge, finish
     with a transversal factor, and lift everything back.

Every existence step is an exact bounded search; a failed search moves
the state to "failed" with a named stage and witness instead of
pretending success.  The final factor is always revalidated against the
original graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .factor import (
    InputError,
    SearchBudget,
    VertexCoverResult,
    extend_clique_with_index_vector,
    has_kr_factor,
    min_vertex_cover,
    multipartite_kr_factor,
)
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
from .partition import (
    GoodPartitionReport,
    PartitionParams,
    classify_vertices,
    verify_good_partition,
)

import random

STAGE_INIT = "init"
STAGE_COVERED = "covered"
STAGE_DIVISIBILITY_FIXED = "divisibility_fixed"
STAGE_CONTRACTED = "contracted"
STAGE_BALANCED = "balanced"
STAGE_DONE = "done"
STAGE_FAILED = "failed"


@dataclass
class DivisibilityLedger:
    q: int = 0
    a: int = 0
    b: int = 0
    q_i: list[int] = field(default_factory=list)
    p_i: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"q": self.q, "a": self.a, "b": self.b,
                "q_i": list(self.q_i), "p_i": list(self.p_i)}


@dataclass
class ContractedGraph:
    """The auxiliary graph G* plus enough provenance to lift factors back.

    A-class vertices keep a new-id -> old-id remap; each contracted
    K_{r-s} is a single new vertex, each reserved K_{r-s+1} a new
    adjacent pair.
    """

    graph: Graph
    partition: LabeledPartition  # s+1 classes: A_1', ..., A_s', B*
    old_of: list[Optional[int]]  # new id -> old id for A' vertices, else None
    vertex_cliques: dict[int, tuple[int, ...]]  # w_i -> contracted K_{r-s}
    edge_cliques: dict[tuple[int, int], tuple[int, ...]]  # (w_j, w_j') -> K_{r-s+1}


@dataclass
class PipelineState:
    g: Graph
    partition: LabeledPartition  # A classes sorted by size; B explicit
    params: PartitionParams
    stage: str = STAGE_INIT
    tilings: dict = field(default_factory=lambda: {
        "K": Tiling(()), "H": Tiling(()), "R": Tiling(()),
        "F": Tiling(()), "Q": Tiling(()), "T": Tiling(()),
    })
    ledger: DivisibilityLedger = field(default_factory=DivisibilityLedger)
    matchings: list[Tiling] = field(default_factory=list)  # M_i per A class
    u_mask: int = 0
    u_prime_mask: int = 0
    b_residual: int = 0  # current B'' mask (shrinks through the stages)
    residual_b_factor: Optional[Tiling] = None
    contracted: Optional[ContractedGraph] = None
    balanced_factor: Optional[Tiling] = None  # K_{s+1}-factor of G*
    factor: Optional[Tiling] = None  # final K_r-factor of g
    failure: Optional[str] = None
    trace: list[dict] = field(default_factory=list)
    relaxed: bool = False

    @property
    def s(self) -> int:
        return self.partition.s

    @property
    def r(self) -> int:
        return self.params.r

    def used_mask(self) -> int:
        m = 0
        for t in self.tilings.values():
            m |= t.vertex_mask()
        return m

    def class_residual(self, i: int) -> int:
        """Class i minus all vertices consumed by K, H, R."""
        consumed = (self.tilings["K"].vertex_mask()
                    | self.tilings["H"].vertex_mask()
                    | self.tilings["R"].vertex_mask())
        return self.partition.all_classes[i] & ~consumed

    def record(self, stage: str, **extra) -> None:
        self.stage = stage
        entry = {
            "stage": stage,
            "ledger": self.ledger.to_json(),
            "tiling_sizes": {k: t.size() for k, t in self.tilings.items()},
        }
        entry.update(extra)
        self.trace.append(entry)

    def fail(self, message: str) -> "PipelineState":
        self.failure = message
        self.record(STAGE_FAILED, reason=message)
        return self

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.trace)


def _sorted_partition(p: LabeledPartition) -> LabeledPartition:
    """A classes in nondecreasing size order (ties by smallest member)."""
    ordered = sorted(p.a_classes, key=lambda c: (c.bit_count(), c & -c))
    return LabeledPartition(tuple(ordered), p.b if p.b is not None else 0)


def _good_masks(state: PipelineState) -> list[int]:
    """Per-class good-vertex masks at threshold alpha^(1/5) * n."""
    cls = classify_vertices(
        state.g, state.partition, state.params.alpha ** 0.2, state.params.n
    )
    return list(cls.good)


def _exceptional_b(state: PipelineState) -> int:
    cls = classify_vertices(
        state.g, state.partition, state.params.alpha ** 0.2, state.params.n
    )
    return cls.exceptional[state.s] & state.partition.all_classes[state.s]


def prepare(
    g: Graph,
    p: LabeledPartition,
    params: PartitionParams,
    relaxed: bool = False,
    report: Optional[GoodPartitionReport] = None,
) -> PipelineState:
    """Initial state: sorted partition, matchings M_i, protected set U.

    `report` lets callers skip re-verification; by default the partition
    must verify as good before the pipeline runs.
    """
    if p.b is None:
        p = LabeledPartition(p.a_classes, 0)
    if report is None:
        report = verify_good_partition(g, p, params)
    state = PipelineState(g, _sorted_partition(p), params, relaxed=relaxed)
    if not report.is_good:
        return state.fail(f"good-partition verification: {report.failing()} failed")
    n, r, s = params.n, params.r, state.s
    classes = state.partition.a_classes
    good = _good_masks(state)
    matchings: list[Tiling] = []
    for i, ci in enumerate(classes):
        size = ci.bit_count()
        if size > n:
            sub, remap = g.induced_subgraph(ci)
            mm = maximum_matching(sub)
            want = size - n + r
            if mm.size() < want:
                return state.fail(
                    f"matching supply: A_{i+1} has matching number {mm.size()} < {want}"
                )
            edges = tuple(
                tuple(sorted((remap[u], remap[v]))) for u, v in mm.cliques
            )[:want]
            matchings.append(Tiling(edges))
        elif i == s - 1 and size == n:
            # one edge with at most one vertex that is not good for A_s
            pick = None
            for u in bits(ci):
                for v in bits(g.adj[u] & ci & ~((1 << (u + 1)) - 1)):
                    non_good = (0 if good[i] >> u & 1 else 1) + (
                        0 if good[i] >> v & 1 else 1)
                    if non_good <= 1:
                        pick = (u, v)
                        break
                if pick:
                    break
            if pick is None:
                matchings.append(Tiling(()))
            else:
                matchings.append(Tiling((pick,)))
        else:
            matchings.append(Tiling(()))
    state.matchings = matchings
    state.u_mask = mask_of(v for m in matchings for c in m.cliques for v in c)
    state.record(STAGE_INIT)
    return state


def _extend_or_fail(
    state: PipelineState,
    seed: tuple[int, ...],
    target: list[int],
    forbidden: int,
    good_only: list[Optional[int]],
) -> Optional[tuple[int, ...]]:
    """Good-first clique extension; optional any-vertex fallback."""
    clique = extend_clique_with_index_vector(
        state.g, state.partition, seed, target, forbidden, good_only
    )
    if clique is None and state.relaxed:
        clique = extend_clique_with_index_vector(
            state.g, state.partition, seed, target, forbidden, None
        )
    return clique


def cover_bad_and_exceptional(state: PipelineState) -> PipelineState:
    """Stage 1: disjoint K_r copies through every uncovered target vertex.

    Each clique has index vector (1,...,1,r-s), avoids U, and contains
    exactly one target (other targets are forbidden during extension).
    """
    if state.stage != STAGE_INIT:
        raise InputError(f"cover_bad_and_exceptional expects init, got {state.stage}")
    n, r, s = state.params.n, state.r, state.s
    classes = state.partition.all_classes
    good = _good_masks(state)
    type1: list[int] = []
    for i, ci in enumerate(state.partition.a_classes):
        if ci.bit_count() <= n:
            type1.extend(bits(ci & ~state.u_mask & ~good[i]))
    exceptional = _exceptional_b(state)
    type2 = sorted(bits(exceptional))
    targets_mask = mask_of(type1) | exceptional

    used = 0
    q_cliques: list[tuple[int, ...]] = []
    for v in sorted(type1):
        target = [1] * s + [r - s]
        forbidden = used | state.u_mask | (targets_mask & ~(1 << v))
        good_only: list[Optional[int]] = [good[j] for j in range(s)] + [None]
        good_only[state.partition.class_of(v)] = None  # v is the seed
        clique = _extend_or_fail(state, (v,), target, forbidden, good_only)
        if clique is None:
            return state.fail(f"cover: no K_{r} through part vertex {v}")
        q_cliques.append(clique)
        used |= mask_of(clique)

    t_cliques: list[tuple[int, ...]] = []
    for w in type2:
        target = [1] * s + [r - s]
        forbidden = used | state.u_mask | (targets_mask & ~(1 << w))
        good_only = [good[j] for j in range(s)] + [None]
        clique = _extend_or_fail(state, (w,), target, forbidden, good_only)
        if clique is None:
            return state.fail(f"cover: no K_{r} through exceptional vertex {w}")
        t_cliques.append(clique)
        used |= mask_of(clique)

    state.tilings["Q"] = Tiling(tuple(q_cliques))
    state.tilings["T"] = Tiling(tuple(t_cliques))
    state.tilings["K"] = Tiling(tuple(q_cliques) + tuple(t_cliques))
    for c in state.tilings["K"].cliques:
        iv = index_vector(state.partition, c)
        if iv != tuple([1] * s + [r - s]):
            raise GraphError(f"cover clique {c} has index vector {iv}")
    state.b_residual = classes[s] & ~used
    state.record(STAGE_COVERED, targets={"type1": len(type1), "type2": len(type2)})
    return state


def _water_fill(total: int, caps: list[int]) -> Optional[list[int]]:
    """Greedy smallest-index-first assignment of `total` under `caps`."""
    out = []
    for cap in caps:
        take = min(cap, total)
        out.append(take)
        total -= take
    return out if total == 0 else None


def _pack_cliques(
    g: Graph, k: int, allowed: int, want: int
) -> Optional[list[tuple[int, ...]]]:
    """Exactly `want` disjoint K_k copies inside `allowed`, or None.

    Backtracking over anchor vertices so a greedy dead end cannot hide a
    feasible packing.
    """
    if want == 0:
        return []
    adj = g.adj
    picked: list[tuple[int, ...]] = []

    def cliques_at(v: int, pool: int) -> list[tuple[int, ...]]:
        found: list[tuple[int, ...]] = []
        stack: list[int] = [v]

        def grow(p: int) -> None:
            if len(stack) == k:
                found.append(tuple(stack))
                return
            for u in bits(p):
                stack.append(u)
                grow(p & adj[u] & ~((1 << (u + 1)) - 1))
                stack.pop()

        grow(pool)
        return found

    def search(pool: int) -> bool:
        if len(picked) == want:
            return True
        if pool.bit_count() < k * (want - len(picked)):
            return False
        v = (pool & -pool).bit_length() - 1
        rest = pool & ~(1 << v)
        for c in cliques_at(v, pool & adj[v] & ~((1 << (v + 1)) - 1)):
            picked.append(c)
            if search(pool & ~mask_of(c)):
                return True
            picked.pop()
        # the anchor vertex may simply stay untiled
        return search(rest)

    if search(allowed):
        return list(picked)
    return None


def fix_divisibility(state: PipelineState) -> PipelineState:
    """Stage 2.1: make the B remainder divisible and pre-balance the parts.

    H removes the mod-(r-s) residue q, R burns (r-s)a surplus matching
    edges from large parts, F reserves (r-s)b extra K_{r-s+1} copies for
    contraction into edges.
    """
    if state.stage != STAGE_COVERED:
        raise InputError(f"fix_divisibility expects covered, got {state.stage}")
    n, r, s = state.params.n, state.r, state.s
    rs = r - s
    classes = state.partition.a_classes
    good = _good_masks(state)
    b_rem = state.b_residual
    led = state.ledger

    if rs == 0:
        state.record(STAGE_DIVISIBILITY_FIXED, fast_path="s=r")
        return state

    led.q = b_rem.bit_count() % rs
    sizes = [c.bit_count() for c in classes]
    skip_schedule: list[int] = []  # class index skipped by each H clique
    if led.q:
        if sizes[s - 1] > n:
            skip_schedule = [s - 1] * led.q  # keep the large top part untouched
            led.q_i = []
        else:
            caps = [n - sz for sz in sizes]
            q_i = _water_fill(led.q, caps)
            if q_i is None:
                return state.fail(
                    f"divisibility: cannot place q={led.q} within caps {caps}"
                )
            led.q_i = q_i
            for i, qi in enumerate(q_i):
                skip_schedule.extend([i] * qi)

    used = state.tilings["K"].vertex_mask() | state.u_mask
    h_cliques: list[tuple[int, ...]] = []
    for skip in skip_schedule:
        target = [1] * s + [rs + 1]
        target[skip] = 0
        good_only: list[Optional[int]] = [good[j] for j in range(s)] + [None]
        clique = _extend_or_fail(state, (), target, used, good_only)
        if clique is None:
            return state.fail(
                f"divisibility: no H clique skipping class A_{skip+1}"
            )
        h_cliques.append(clique)
        used |= mask_of(clique)
    state.tilings["H"] = Tiling(tuple(h_cliques))

    consumed = state.tilings["K"].vertex_mask() | state.tilings["H"].vertex_mask()
    hat_sizes = [(c & ~consumed).bit_count() for c in classes]
    hat_b = (state.partition.all_classes[s] & ~consumed).bit_count()
    hat_total = sum(hat_sizes) + hat_b
    if hat_total % r or hat_b % rs:
        return state.fail(
            f"ledger: |G^|={hat_total} or |B^|={hat_b} fails divisibility"
        )
    led.a = hat_total // r - hat_b // rs

    r_cliques: list[tuple[int, ...]] = []
    state.u_prime_mask = 0
    if led.a > 0:
        large = [i for i in range(s) if sizes[i] > n]
        caps = [hat_sizes[i] - hat_total // r for i in large]
        fill = _water_fill(rs * led.a, caps)
        if fill is None:
            return state.fail(
                f"ledger: cannot place (r-s)a={rs * led.a} within caps {caps}"
            )
        led.p_i = fill
        edge_pool: list[tuple[int, tuple[int, ...]]] = []
        for i, p_count in zip(large, fill):
            alive = [
                e for e in state.matchings[i].cliques
                if not (mask_of(e) & consumed)
            ]
            if len(alive) < p_count:
                return state.fail(
                    f"ledger: A_{i+1} has {len(alive)} surviving matching edges < p_i={p_count}"
                )
            for e in alive[:p_count]:
                edge_pool.append((i, e))
                state.u_prime_mask |= mask_of(e)
        used = consumed | (state.u_mask & ~state.u_prime_mask)
        for i, edge in edge_pool:
            target = [1] * s + [rs - 1]
            target[i] = 2
            good_only = [good[j] for j in range(s)] + [None]
            good_only[i] = None  # the matching edge is the seed
            clique = _extend_or_fail(state, edge, target, used, good_only)
            if clique is None:
                return state.fail(
                    f"divisibility: no R clique through matching edge {edge}"
                )
            r_cliques.append(clique)
            used |= mask_of(clique)
    state.tilings["R"] = Tiling(tuple(r_cliques))

    consumed = (state.tilings["K"].vertex_mask()
                | state.tilings["H"].vertex_mask()
                | state.tilings["R"].vertex_mask())
    b_prime = state.partition.all_classes[s] & ~consumed
    g_prime = state.g.n - consumed.bit_count()
    if b_prime.bit_count() % rs or g_prime % r:
        return state.fail("ledger: B' or G' fails divisibility after R")
    led.b = b_prime.bit_count() // rs - g_prime // r
    if led.b < 0:
        return state.fail(f"ledger: b={led.b} negative")
    if led.b > 0:
        packing = _pack_cliques(state.g, rs + 1, b_prime, rs * led.b)
        if packing is None:
            return state.fail(
                f"divisibility: cannot pack {rs * led.b} disjoint K_{rs+1} copies in B'"
            )
        state.tilings["F"] = Tiling(tuple(packing))
    state.b_residual = b_prime & ~state.tilings["F"].vertex_mask()
    if state.b_residual.bit_count() % rs:
        return state.fail("ledger: B'' fails divisibility")
    state.record(STAGE_DIVISIBILITY_FIXED)
    return state


def _components(g: Graph, subset: int) -> list[int]:
    """Connected-component masks of G[subset]."""
    out = []
    seen = 0
    for v in bits(subset):
        if seen >> v & 1:
            continue
        comp = 1 << v
        frontier = 1 << v
        while frontier:
            grow = 0
            for u in bits(frontier):
                grow |= g.adj[u] & subset & ~comp
            comp |= grow
            frontier = grow
        out.append(comp)
        seen |= comp
    return out


def _find_triangle(g: Graph, allowed: int) -> Optional[tuple[int, ...]]:
    for u in bits(allowed):
        for v in bits(g.adj[u] & allowed & ~((1 << (u + 1)) - 1)):
            rest = g.adj[u] & g.adj[v] & allowed & ~((1 << (v + 1)) - 1)
            if rest:
                w = (rest & -rest).bit_length() - 1
                return (u, v, w)
    return None


def _extend_triangle_skipping(
    state: PipelineState, triangle: tuple[int, ...], skip: int, forbidden: int
) -> Optional[tuple[int, ...]]:
    """Grow a B triangle into K_r using one good vertex per A class except `skip`."""
    s = state.s
    good = _good_masks(state)
    target = [1] * s + [len(triangle)]
    target[skip] = 0
    good_only: list[Optional[int]] = [good[j] for j in range(s)] + [None]
    return _extend_or_fail(state, triangle, target, forbidden, good_only)


def _repair_two_odd_components(
    state: PipelineState, comps: list[int]
) -> Optional[str]:
    """The r-s = 2 obstruction repair; returns an error string or None.

    Mutates b_residual and the K / H / F tilings per the two cases:
    swap in a spare B triangle (from F or an H clique) or burn a
    matching edge of the top part.
    """
    n, s = state.params.n, state.s
    g = state.g
    sizes = [c.bit_count() for c in state.partition.a_classes]
    comp1, comp2 = comps
    tri = [_find_triangle(g, comp1), _find_triangle(g, comp2)]
    consumed = (state.tilings["K"].vertex_mask()
                | state.tilings["H"].vertex_mask()
                | state.tilings["R"].vertex_mask())

    if sizes[s - 1] >= n:
        # Case 1: consume an edge of M_s together with one B'' vertex
        if tri[0] is None or tri[1] is None:
            return "repair: an odd component has no triangle"
        a_s_residual = state.partition.a_classes[s - 1] & ~consumed
        edge = None
        for e in state.matchings[s - 1].cliques:
            em = mask_of(e)
            if em & a_s_residual == em and not (em & state.u_prime_mask):
                edge = e
                break
        if edge is None:
            return "repair: no surviving matching edge in the top part"
        ext = [
            _extend_triangle_skipping(state, tri[c], s - 1, consumed | state.u_mask)
            for c in range(2)
        ]
        if ext[0] is None or ext[1] is None:
            return "repair: cannot extend a component triangle to K_r"
        good = _good_masks(state)
        target = [1] * s + [1]
        target[s - 1] = 2
        good_only: list[Optional[int]] = [good[j] for j in range(s)] + [None]
        good_only[s - 1] = None
        forbidden = (consumed | mask_of(ext[0]) | mask_of(ext[1])
                     | (state.u_mask & ~mask_of(edge))
                     | ~state.g.full_mask)
        # the B vertex must come from the residual itself
        good_only[s] = state.b_residual
        k1 = _extend_or_fail(state, edge, target, forbidden, good_only)
        if k1 is None:
            return "repair: no clique through the matching edge and B''"
        w = next(v for v in k1 if state.b_residual >> v & 1)
        hit = 0 if comp1 >> w & 1 else 1
        other = 1 - hit
        added = (k1, ext[other])
        state.tilings["K"] = Tiling(state.tilings["K"].cliques + added)
        state.b_residual &= ~((1 << w) | mask_of(ext[other]))
        return None

    # Case 2: swap a spare triangle from F (or from an H clique) into B''
    spare = None
    source = None
    for idx, c in enumerate(state.tilings["F"].cliques):
        spare, source = c, ("F", idx)
        break
    if spare is None:
        for idx, c in enumerate(state.tilings["H"].cliques):
            b_part = tuple(v for v in c
                           if state.partition.class_of(v) == s)
            if len(b_part) == 3:
                spare, source = b_part, ("H", idx)
                break
    if spare is None:
        return "repair: no spare triangle in F or H"
    attach = None
    for v in spare:
        if g.adj[v] & (comp1 | comp2):
            attach = 0 if g.adj[v] & comp1 else 1
            break
    if attach is None:
        return "repair: spare triangle has no neighbor in either component"
    other = 1 - attach
    t_other = tri[other]
    if t_other is None:
        return "repair: target component has no triangle"
    kind, idx = source
    consumed_now = consumed | state.tilings["F"].vertex_mask()
    if kind == "F":
        cliques = list(state.tilings["F"].cliques)
        cliques[idx] = t_other
        state.tilings["F"] = Tiling(tuple(cliques))
    else:
        old = state.tilings["H"].cliques[idx]
        skip = next(j for j in range(s)
                    if index_vector(state.partition, old)[j] == 0)
        replacement = _extend_triangle_skipping(
            state, t_other, skip, (consumed_now & ~mask_of(old)) | state.u_mask
        )
        if replacement is None:
            return "repair: cannot rebuild the H clique around the component triangle"
        cliques = list(state.tilings["H"].cliques)
        cliques[idx] = replacement
        state.tilings["H"] = Tiling(tuple(cliques))
    state.b_residual = (state.b_residual & ~mask_of(t_other)) | mask_of(spare)
    return None


def factor_residual_B(state: PipelineState) -> PipelineState:
    """Stage 2.2: perfect K_{r-s}-tiling of the final B remainder."""
    if state.stage != STAGE_DIVISIBILITY_FIXED:
        raise InputError(f"factor_residual_B expects divisibility_fixed, got {state.stage}")
    rs = state.r - state.s
    g = state.g
    if rs == 0:
        state.residual_b_factor = Tiling(())
        state.record(STAGE_DIVISIBILITY_FIXED, residual_b=0)
        return state
    if rs == 1:
        state.residual_b_factor = Tiling(
            tuple((v,) for v in bits(state.b_residual))
        )
        state.record(STAGE_DIVISIBILITY_FIXED,
                     residual_b=state.residual_b_factor.size())
        return state

    def try_match(subset: int) -> Optional[Tiling]:
        sub, remap = g.induced_subgraph(subset)
        if rs == 2:
            mm = maximum_matching(sub)
            if 2 * mm.size() != sub.n:
                return None
            return Tiling(tuple(
                tuple(sorted((remap[u], remap[v]))) for u, v in mm.cliques
            ))
        res = has_kr_factor(sub, rs)
        if res.exists is not True:
            return None
        return Tiling(tuple(
            tuple(sorted(remap[v] for v in c)) for c in res.factor.cliques
        ))

    tiling = try_match(state.b_residual)
    if tiling is None and rs == 2:
        comps = _components(g, state.b_residual)
        if len(comps) == 2 and all(c.bit_count() % 2 for c in comps):
            err = _repair_two_odd_components(state, comps)
            if err is not None:
                return state.fail(err)
            tiling = try_match(state.b_residual)
            if tiling is None:
                return state.fail(
                    "repair: remainder still has no perfect matching"
                )
        else:
            return state.fail(
                f"residual B: no perfect matching; components of sizes "
                f"{[c.bit_count() for c in comps]}"
            )
    elif tiling is None:
        return state.fail(f"residual B: no K_{rs}-factor found")
    state.residual_b_factor = tiling
    state.record(STAGE_DIVISIBILITY_FIXED, residual_b=tiling.size())
    return state


def contract(state: PipelineState) -> PipelineState:
    """Stage 2.3: build the auxiliary graph G*.

    Contracted K_{r-s} copies become single B* vertices, reserved
    K_{r-s+1} copies become adjacent B* pairs; cross edges require
    adjacency to the whole contracted clique.
    """
    if state.residual_b_factor is None:
        raise InputError("contract needs a residual B factor first")
    g = state.g
    r, s = state.r, state.s
    rs = r - s
    consumed = (state.tilings["K"].vertex_mask()
                | state.tilings["H"].vertex_mask()
                | state.tilings["R"].vertex_mask())
    a_primes = [c & ~consumed for c in state.partition.a_classes]

    old_of: list[Optional[int]] = []
    new_of: dict[int, int] = {}
    for c in a_primes:
        for v in bits(c):
            new_of[v] = len(old_of)
            old_of.append(v)
    n_a = len(old_of)
    vertex_cliques: dict[int, tuple[int, ...]] = {}
    edge_cliques: dict[tuple[int, int], tuple[int, ...]] = {}
    star_items: list[tuple[tuple[int, ...], Optional[int]]] = []
    for c in state.residual_b_factor.cliques:
        star_items.append((c, None))
    total = n_a + len(star_items) + 2 * len(state.tilings["F"].cliques)
    rows = [0] * total
    next_id = n_a
    for c, _ in star_items:
        vertex_cliques[next_id] = c
        old_of.append(None)
        common = g.common_neighborhood(list(c), g.full_mask)
        for v in bits(common):
            if v in new_of:
                rows[next_id] |= 1 << new_of[v]
                rows[new_of[v]] |= 1 << next_id
        next_id += 1
    for c in state.tilings["F"].cliques:
        w1, w2 = next_id, next_id + 1
        edge_cliques[(w1, w2)] = c
        old_of.extend([None, None])
        common = g.common_neighborhood(list(c), g.full_mask)
        for v in bits(common):
            if v in new_of:
                for w in (w1, w2):
                    rows[w] |= 1 << new_of[v]
                    rows[new_of[v]] |= 1 << w
        rows[w1] |= 1 << w2
        rows[w2] |= 1 << w1
        next_id += 2
    for v_old, v_new in new_of.items():
        for u in bits(g.adj[v_old]):
            if u in new_of and state.partition.class_of(u) != state.partition.class_of(v_old):
                rows[v_new] |= 1 << new_of[u]
    # class matchings must survive into G* so the balance stage can
    # consume them; they are the only intra-class edges carried over
    for m in state.matchings:
        for u, v in m.cliques:
            if u in new_of and v in new_of:
                rows[new_of[u]] |= 1 << new_of[v]
                rows[new_of[v]] |= 1 << new_of[u]
    gstar = Graph(total, tuple(rows))
    gstar.validate()
    b_star = mask_of(range(n_a, total))
    a_star = tuple(mask_of(new_of[v] for v in bits(c)) for c in a_primes)
    # with s = r there is nothing to contract and no B* class at all
    p_star = LabeledPartition(a_star + (b_star,) if rs else a_star, None)

    g_prime_size = sum(c.bit_count() for c in a_primes) \
        + state.partition.all_classes[s].bit_count() \
        - (consumed & state.partition.all_classes[s]).bit_count()
    if rs:
        if r * total != (s + 1) * g_prime_size:
            return state.fail(
                f"contract: |G*|={total} != (s+1)|G'|/r={(s+1)*g_prime_size/r:.6g}"
            )
        expect_bstar = g_prime_size // r + rs * state.ledger.b
        if b_star.bit_count() != expect_bstar:
            return state.fail(
                f"contract: |B*|={b_star.bit_count()} != |G'|/r+(r-s)b={expect_bstar}"
            )
    state.contracted = ContractedGraph(gstar, p_star, old_of, vertex_cliques, edge_cliques)
    state.record(STAGE_CONTRACTED, gstar_vertices=total, b_star=b_star.bit_count())
    return state


def balance_factor(state: PipelineState) -> PipelineState:
    """Stage 3: K_{s+1}-factor of G* where every class matching edge is
    consumed by exactly one clique and the rest is a transversal factor.
    """
    if state.stage != STAGE_CONTRACTED or state.contracted is None:
        raise InputError(f"balance_factor expects contracted, got {state.stage}")
    con = state.contracted
    gstar, pstar = con.graph, con.partition
    t = pstar.t  # s + 1
    classes = list(pstar.all_classes)
    sizes = [c.bit_count() for c in classes]
    if gstar.n % t:
        return state.fail(f"balance: |G*|={gstar.n} not divisible by {t}")
    n_star = gstar.n // t

    # matchings per class in G* ids, trimmed to exactly k_i edges
    matchings: list[list[tuple[int, int]]] = [[] for _ in range(t)]
    new_of = {old: new for new, old in enumerate(con.old_of) if old is not None}
    for i in range(state.s):
        k_i = sizes[i] - n_star
        if k_i <= 0:
            continue
        alive = []
        for u, v in state.matchings[i].cliques:
            if u in new_of and v in new_of:
                alive.append(tuple(sorted((new_of[u], new_of[v]))))
        if len(alive) < k_i:
            return state.fail(
                f"balance: class A_{i+1}' needs {k_i} matching edges, has {len(alive)}"
            )
        matchings[i] = alive[:k_i]
    if state.r > state.s:
        pair_edges = sorted(con.edge_cliques.keys())
        k_b = sizes[t - 1] - n_star
        if len(pair_edges) != k_b:
            return state.fail(
                f"balance: B* surplus {k_b} != contracted pair count {len(pair_edges)}"
            )
        matchings[t - 1] = pair_edges

    # size / cross-degree analogs checked up front
    alpha_star = 2 * state.r * state.r * state.params.alpha
    for i, sz in enumerate(sizes):
        if sz > n_star + alpha_star * state.params.n:
            return state.fail(
                f"balance precondition: class {i} size {sz} exceeds "
                f"{n_star} + {alpha_star:.4g}*n"
            )
    beta_star = 2 * max(1, state.r - state.s) * state.params.beta_prime
    for i, ci in enumerate(classes):
        for v in bits(ci):
            for j, cj in enumerate(classes):
                if i != j and cj and gstar.degree_into(v, cj) < (1 - beta_star) * cj.bit_count():
                    return state.fail(
                        f"balance precondition: vertex {v} has degree "
                        f"{gstar.degree_into(v, cj)} into class {j} "
                        f"(< (1-{beta_star:.4g})*{cj.bit_count()})"
                    )

    order = sorted(range(t), key=lambda i: (sizes[i], i))
    small = [i for i in order if sizes[i] <= n_star]
    large = [i for i in order if sizes[i] > n_star]
    unused: list[list[tuple[int, int]]] = [list(m) for m in matchings]
    protected = mask_of(v for m in unused for e in m for v in e)
    used_mask = 0
    chosen: list[tuple[int, ...]] = []

    def take_clique(edge_class: int, skip: int, edge: tuple[int, int]) -> bool:
        nonlocal used_mask, protected
        target = [1] * t
        target[skip] = 0
        target[edge_class] = 2
        forbidden = used_mask | (protected & ~mask_of(edge))
        clique = extend_clique_with_index_vector(
            gstar, pstar, edge, target, forbidden, None
        )
        if clique is None:
            return False
        chosen.append(clique)
        used_mask |= mask_of(clique)
        protected &= ~mask_of(edge)
        return True

    # step 1: lift small classes (all but the smallest) to the common size
    for i in small[1:]:
        for _ in range(n_star - sizes[i]):
            placed = False
            for ell in large:
                if not unused[ell]:
                    continue
                edge = unused[ell][0]
                if take_clique(ell, i, edge):
                    unused[ell].pop(0)
                    placed = True
                    break
            if not placed:
                return state.fail(
                    f"balance: no clique available to shrink class {i}"
                )
    # step 2: burn the remaining matching edges against the smallest class
    smallest = small[0] if small else order[0]
    for ell in large:
        while unused[ell]:
            edge = unused[ell][0]
            if not take_clique(ell, smallest, edge):
                return state.fail(
                    f"balance: no clique through matching edge {edge} of class {ell}"
                )
            unused[ell].pop(0)

    residual = gstar.full_mask & ~used_mask
    res_sizes = [(c & residual).bit_count() for c in classes]
    if len(set(res_sizes)) != 1:
        return state.fail(f"balance: residual classes unbalanced {res_sizes}")
    sub, remap = gstar.induced_subgraph(residual)
    inv = {old: new for new, old in enumerate(remap)}
    sub_partition = LabeledPartition(
        tuple(mask_of(inv[v] for v in bits(c & residual)) for c in classes),
        None,
    )
    res = multipartite_kr_factor(sub, sub_partition)
    if res.exists is not True:
        return state.fail(
            "balance: residual transversal factor "
            + ("timed out" if res.exists is None else "does not exist")
        )
    lifted = tuple(
        tuple(sorted(remap[v] for v in c)) for c in res.factor.cliques
    )
    state.balanced_factor = Tiling(tuple(chosen) + lifted)
    state.balanced_factor.validate(gstar)
    if state.balanced_factor.vertex_mask() != gstar.full_mask:
        return state.fail("balance: factor does not cover G*")
    state.record(STAGE_BALANCED,
                 balancing_cliques=len(chosen), transversal=len(lifted))
    return state


def lift_and_assemble(state: PipelineState) -> PipelineState:
    """Stage 4: expand contracted vertices, union all tilings, revalidate."""
    if state.stage != STAGE_BALANCED or state.balanced_factor is None:
        raise InputError(f"lift_and_assemble expects balanced, got {state.stage}")
    con = state.contracted
    pair_of: dict[int, tuple[int, int]] = {}
    for (w1, w2) in con.edge_cliques:
        pair_of[w1] = (w1, w2)
        pair_of[w2] = (w1, w2)
    lifted: list[tuple[int, ...]] = []
    for clique in state.balanced_factor.cliques:
        verts: list[int] = []
        seen_pairs = set()
        for v in clique:
            if con.old_of[v] is not None:
                verts.append(con.old_of[v])
            elif v in con.vertex_cliques:
                verts.extend(con.vertex_cliques[v])
            else:
                pair = pair_of[v]
                if pair in seen_pairs:
                    continue
                if not (pair[0] in clique and pair[1] in clique):
                    raise GraphError(
                        f"lift: contracted pair {pair} split across cliques"
                    )
                seen_pairs.add(pair)
                verts.extend(con.edge_cliques[pair])
        lifted.append(tuple(sorted(verts)))
    total = Tiling(
        tuple(lifted)
        + state.tilings["K"].cliques
        + state.tilings["H"].cliques
        + state.tilings["R"].cliques
    )
    if not is_perfect_factor(state.g, total, state.r):
        raise GraphError("lift: assembled tiling is not a valid factor")
    state.factor = total
    state.record(STAGE_DONE, factor_cliques=total.size())
    return state


def run_pipeline(
    g: Graph,
    p: LabeledPartition,
    params: PartitionParams,
    relaxed: bool = False,
) -> PipelineState:
    """All stages in order; stops at the first failure."""
    state = prepare(g, p, params, relaxed)
    for step in (cover_bad_and_exceptional, fix_divisibility,
                 factor_residual_B, contract, balance_factor,
                 lift_and_assemble):
        if state.stage == STAGE_FAILED:
            return state
        state = step(state)
    return state


@dataclass
class VertexCoverSweepReport:
    r: int
    n: int
    trials: int
    seed: int
    per_trial_max: list[int]
    bound: float  # sqrt(n)/r
    relaxation_used: bool = False

    @property
    def min_over_trials(self) -> int:
        return min(self.per_trial_max)

    @property
    def holds(self) -> bool:
        return all(x >= self.bound for x in self.per_trial_max)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "per_trial_max": list(self.per_trial_max),
            "bound": self.bound,
            "min_over_trials": self.min_over_trials,
            "holds": self.holds,
            "relaxation_used": self.relaxation_used,
        }


def vertex_cover_sweep(
    g: Graph,
    r: int,
    n: int,
    partitions: int = 100,
    seed: int = 0,
    allow_near_regular: bool = False,
    budget: Optional[SearchBudget] = None,
) -> VertexCoverSweepReport:
    """Exact per-class minimum vertex covers over seeded balanced partitions.

    For each random balanced partition {A_1,...,A_r}, records
    max_i minVC(G[A_i]) and compares against sqrt(n)/r.
    """
    if g.n != r * n:
        raise InputError(f"|V|={g.n} is not r*n={r * n}")
    d = (r - 1) * n + 1
    relaxed = False
    if not g.check_regular(d):
        if allow_near_regular and d <= g.min_degree() and g.max_degree() <= d - 1 + n ** 0.5:
            relaxed = True
        else:
            raise InputError(
                f"graph is not {d}-regular; pass allow_near_regular for the "
                f"degree-window relaxation"
            )
    per_trial: list[int] = []
    for trial in range(partitions):
        rng = random.Random(f"vcsweep:{seed}:{trial}")
        order = list(range(g.n))
        rng.shuffle(order)
        best = 0
        for i in range(r):
            cls = mask_of(order[i * n:(i + 1) * n])
            sub, _ = g.induced_subgraph(cls)
            vc: VertexCoverResult = min_vertex_cover(sub, budget)
            if not vc.exact:
                raise InputError("vertex cover search exhausted its budget")
            best = max(best, vc.size())
        per_trial.append(best)
    return VertexCoverSweepReport(
        r, n, partitions, seed, per_trial, n ** 0.5 / r, relaxed
    )

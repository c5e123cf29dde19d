"""Graph family generators with built-in audits.

Each generator returns the graph together with its canonical labeled
partition (when one exists) and refuses to emit anything that fails its
own audit: regularity, part emptiness, or triangle-freeness where
claimed.  Generators are pure functions of (parameters, seed).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Optional

from .factor import InputError
from .graphs import Graph, GraphError, LabeledPartition, bits, mask_of

FAMILY_NAMES = (
    "balanced",
    "stars",
    "skew",
    "bipartite2f",
    "random-regular",
    "matching",
)


@dataclass(frozen=True)
class FamilySpec:
    family: str
    r: int = 0
    n: int = 0
    v: int = 0
    d: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILY_NAMES:
            raise InputError(
                f"unknown family {self.family!r}; choose from {FAMILY_NAMES}"
            )

    @staticmethod
    def parse(text: str) -> "FamilySpec":
        """Parse shorthand like "balanced:r=3,n=3" or "random-regular:v=12,d=9,seed=1"."""
        head, _, tail = text.partition(":")
        kwargs = {}
        if tail:
            for piece in tail.split(","):
                key, eq, value = piece.partition("=")
                if not eq or key.strip() not in ("r", "n", "v", "d", "seed"):
                    raise InputError(f"bad family parameter {piece!r}")
                try:
                    kwargs[key.strip()] = int(value)
                except ValueError:
                    raise InputError(f"non-integer value in {piece!r}") from None
        return FamilySpec(head.strip(), **kwargs)

    @staticmethod
    def from_json(obj: dict) -> "FamilySpec":
        return FamilySpec(
            obj["family"],
            r=obj.get("r", 0),
            n=obj.get("n", 0),
            v=obj.get("v", 0),
            d=obj.get("d", 0),
            seed=obj.get("seed", 0),
        )

    def to_json(self) -> dict:
        out = {"family": self.family}
        for key in ("r", "n", "v", "d", "seed"):
            if getattr(self, key):
                out[key] = getattr(self, key)
        return out


def _audit_regular(g: Graph, d: int, label: str) -> None:
    g.validate()
    if not g.check_regular(d):
        degs = sorted({g.degree(v) for v in range(g.n)})
        raise GraphError(f"{label}: expected {d}-regular, found degrees {degs}")


def _has_triangle(g: Graph) -> bool:
    for u in range(g.n):
        for v in bits(g.adj[u] >> (u + 1) << (u + 1)):
            if g.adj[u] & g.adj[v]:
                return True
    return False


def _complete_multipartite(sizes: list[int]) -> tuple[Graph, list[int]]:
    """Complete multipartite graph; returns (graph, class masks)."""
    n = sum(sizes)
    offsets, acc = [], 0
    for s in sizes:
        offsets.append(acc)
        acc += s
    masks = [
        mask_of(range(off, off + s)) for off, s in zip(offsets, sizes)
    ]
    full = (1 << n) - 1
    rows = []
    for i, _ in enumerate(sizes):
        row_mask = full & ~masks[i]
        rows.extend([row_mask] * sizes[i])
    return Graph(n, tuple(rows)), masks


def gen_balanced_multipartite(r: int, n: int) -> tuple[Graph, LabeledPartition]:
    """K_{n,...,n} with r parts; ((r-1)n)-regular on rn vertices."""
    if r < 2 or n < 1:
        raise InputError("need r >= 2 and n >= 1")
    g, masks = _complete_multipartite([n] * r)
    _audit_regular(g, (r - 1) * n, "balanced multipartite")
    return g, LabeledPartition(tuple(masks))


def gen_multipartite_plus_stars(r: int, n: int) -> tuple[Graph, LabeledPartition]:
    """K_{n,...,n} plus one spanning star inside each part.

    The first vertex of each part is the center.  Minimum degree becomes
    (r-1)n + 1; centers reach (r-1)n + n - 1.
    """
    if r < 2:
        raise InputError("need r >= 2")
    if n < 2:
        raise InputError("a spanning star needs a part of size at least 2")
    g, masks = _complete_multipartite([n] * r)
    rows = list(g.adj)
    for i in range(r):
        center = i * n
        for leaf in range(center + 1, center + n):
            rows[center] |= 1 << leaf
            rows[leaf] |= 1 << center
    out = Graph(g.n, tuple(rows))
    out.validate()
    want_min = (r - 1) * n + 1
    want_center = (r - 1) * n + n - 1
    for v in range(out.n):
        d = out.degree(v)
        expect = want_center if v % n == 0 else want_min
        if d != expect:
            raise GraphError(f"stars construction: vertex {v} has degree {d}, expected {expect}")
    return out, LabeledPartition(tuple(masks))


def _circulant(m: int, offsets: list[int]) -> Graph:
    edges = []
    for v in range(m):
        for off in offsets:
            edges.append((v, (v + off) % m))
    return Graph.from_edges(m, set(tuple(sorted(e)) for e in edges))


def _triangle_free_regular(m: int, r: int) -> Graph:
    """An r-regular triangle-free graph on m vertices, or raise.

    Template order: K_{r,r} when m = 2r, then the lexicographically first
    triangle-free circulant connection set.
    """
    if r < 1 or m <= 2 * r - 1:
        raise InputError(
            f"no triangle-free {r}-regular graph on {m} vertices (need >= 2r)"
        )
    if r * m % 2:
        raise InputError(
            f"{r}-regular on {m} vertices violates handshake parity"
        )
    if m == 2 * r:
        g, _ = _complete_multipartite([r, r])
        return g
    half = m // 2
    use_half_offset = r % 2 == 1  # odd r forces the antipodal chord, m even
    pairs_needed = r // 2
    pool = list(range(1, (m + 1) // 2))  # excludes the antipodal chord when m is even
    for combo in itertools.combinations(pool, pairs_needed):
        offsets = list(combo)
        if use_half_offset:
            offsets.append(half)
        g = _circulant(m, offsets)
        if g.check_regular(r) and not _has_triangle(g):
            return g
    raise InputError(
        f"no triangle-free circulant template found for {r}-regular on {m} vertices"
    )


def gen_skew_multipartite(r: int, n: int) -> tuple[Graph, LabeledPartition]:
    """Complete multipartite K_{n+r-1, n-1, ..., n-1} with an r-regular
    triangle-free graph embedded into the large part.

    The result is ((r-1)n+1)-regular on rn vertices with G[A_i] empty for
    i >= 2 and G[A_1] triangle-free; all three claims are audited.
    """
    if r < 2 or n < 2:
        raise InputError("need r >= 2 and n >= 2")
    m = n + r - 1
    inner = _triangle_free_regular(m, r)
    sizes = [m] + [n - 1] * (r - 1)
    g, masks = _complete_multipartite(sizes)
    rows = list(g.adj)
    for u, v in inner.edges():
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    out = Graph(g.n, tuple(rows))
    _audit_regular(out, (r - 1) * n + 1, "skew construction")
    for i in range(1, r):
        if out.edges_inside(masks[i]) != 0:
            raise GraphError(f"skew construction: part {i + 1} is not independent")
    a1_graph, _ = out.induced_subgraph(masks[0])
    if _has_triangle(a1_graph):
        raise GraphError("skew construction: large part is not triangle-free")
    return out, LabeledPartition(tuple(masks))


def gen_bipartite_plus_two_factor(n: int) -> tuple[Graph, LabeledPartition]:
    """K_{n-1,n+1} plus a Hamilton cycle on the larger side.

    (n+1)-regular on 2n vertices; the cycle is the simplest 2-factor.
    """
    if n < 3:
        raise InputError("need n >= 3 so the larger side carries a cycle")
    g, masks = _complete_multipartite([n - 1, n + 1])
    rows = list(g.adj)
    big = sorted(bits(masks[1]))
    for i, u in enumerate(big):
        v = big[(i + 1) % len(big)]
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    out = Graph(g.n, tuple(rows))
    _audit_regular(out, n + 1, "bipartite-plus-2-factor")
    return out, LabeledPartition(tuple(masks))


def gen_matching_in_parts(r: int, n: int) -> tuple[Graph, LabeledPartition]:
    """K_{n,...,n} plus a perfect matching inside each part (n even)."""
    if r < 2 or n < 2 or n % 2:
        raise InputError("need r >= 2 and even n >= 2")
    g, masks = _complete_multipartite([n] * r)
    rows = list(g.adj)
    for i in range(r):
        base = i * n
        for k in range(0, n, 2):
            rows[base + k] |= 1 << (base + k + 1)
            rows[base + k + 1] |= 1 << (base + k)
    out = Graph(g.n, tuple(rows))
    _audit_regular(out, (r - 1) * n + 1, "matching-in-parts")
    return out, LabeledPartition(tuple(masks))


def gen_random_regular(v: int, d: int, seed: int = 0) -> Graph:
    """Seeded d-regular simple graph: circulant start, then 100*|E|
    double-edge swaps.  Deterministic per seed; the swap count is a fixed
    mixing heuristic, not a uniformity guarantee.
    """
    if not 0 <= d < v:
        raise InputError(f"need 0 <= d < v, got d={d}, v={v}")
    if d * v % 2:
        raise InputError(f"d*v = {d * v} is odd; no {d}-regular graph on {v} vertices")
    offsets = list(range(1, d // 2 + 1))
    if d % 2:
        offsets.append(v // 2)
    g = _circulant(v, offsets)
    if not g.check_regular(d):
        raise GraphError("circulant seed graph is not regular; bad offset set")
    edge_set = set(g.edges())
    rng = random.Random(f"regular:{v}:{d}:{seed}")
    swaps = 100 * len(edge_set)
    edges = list(edge_set)
    done = 0
    while done < swaps:
        i, j = rng.randrange(len(edges)), rng.randrange(len(edges))
        if i == j:
            continue
        (a, b), (c, e) = edges[i], edges[j]
        if rng.random() < 0.5:
            c, e = e, c
        done += 1  # attempted swaps count toward the budget
        if len({a, b, c, e}) < 4:
            continue
        new1, new2 = tuple(sorted((a, c))), tuple(sorted((b, e)))
        if new1 in edge_set or new2 in edge_set:
            continue
        edge_set.discard(edges[i])
        edge_set.discard(edges[j])
        edge_set.add(new1)
        edge_set.add(new2)
        edges[i], edges[j] = new1, new2
    out = Graph.from_edges(v, edge_set)
    _audit_regular(out, d, "random regular")
    return out


def predicted_count_balanced(r: int, n: int) -> int:
    """sum_{k=0}^{n} C(n,k)^r: the exact number of subsets of K_{n,...,n}
    inducing a K_r-factor (the empty set included via the k=0 term)."""
    if r < 1 or n < 0:
        raise InputError("need r >= 1 and n >= 0")
    return sum(math.comb(n, k) ** r for k in range(n + 1))


def generate(spec: FamilySpec) -> tuple[Graph, Optional[LabeledPartition]]:
    """Dispatch a FamilySpec to its generator."""
    if spec.family == "balanced":
        return gen_balanced_multipartite(spec.r, spec.n)
    if spec.family == "stars":
        return gen_multipartite_plus_stars(spec.r, spec.n)
    if spec.family == "skew":
        return gen_skew_multipartite(spec.r, spec.n)
    if spec.family == "bipartite2f":
        g, p = gen_bipartite_plus_two_factor(spec.n)
        return g, p
    if spec.family == "matching":
        return gen_matching_in_parts(spec.r, spec.n)
    if spec.family == "random-regular":
        return gen_random_regular(spec.v, spec.d, spec.seed), None
    raise InputError(f"unknown family {spec.family!r}")

"""Dense graph core: bitset adjacency rows, partitions, cliques and tilings.

Vertex ids are dense 0-based integers.  Vertex subsets are plain Python ints
used as bitmasks over [0, n); Python's arbitrary-precision ints give us
popcount (`int.bit_count`) and bitwise ops for free, which is all the
enumeration kernels need.  Graphs are immutable after construction so they
can be shared freely across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence


class GraphError(ValueError):
    """Raised on malformed graph input (bad vertex ids, self-loops, ...)."""


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of `mask` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def popcount(mask: int) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with one bitset adjacency row per vertex."""

    n: int
    adj: tuple[int, ...]

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph(n, tuple(rows))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def validate(self) -> None:
        """Check symmetry and irreflexivity; raises GraphError on breach."""
        for v in range(self.n):
            if self.adj[v] >> self.n:
                raise GraphError(f"row {v} has bits outside [0,{self.n})")
            if self.adj[v] >> v & 1:
                raise GraphError(f"self-loop at vertex {v}")
            for u in bits(self.adj[v]):
                if not self.adj[u] >> v & 1:
                    raise GraphError(f"asymmetric edge ({v},{u})")

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degree_into(self, v: int, subset: int) -> int:
        """|N(v) ∩ subset| as a popcount of the masked adjacency row."""
        if not 0 <= v < self.n:
            raise GraphError(f"vertex {v} out of range")
        return (self.adj[v] & subset).bit_count()

    def common_neighborhood(self, vertices: Sequence[int], subset: int) -> int:
        """Intersection of the neighborhoods of `vertices`, restricted to
        `subset`.  Empty vertex list returns `subset` (empty-intersection
        convention)."""
        m = subset
        for v in vertices:
            if not 0 <= v < self.n:
                raise GraphError(f"vertex {v} out of range")
            m &= self.adj[v]
        return m

    def min_degree(self) -> int:
        return min((self.degree(v) for v in range(self.n)), default=0)

    def max_degree(self) -> int:
        return max((self.degree(v) for v in range(self.n)), default=0)

    def check_regular(self, d: int) -> bool:
        return all(self.degree(v) == d for v in range(self.n))

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            rest = self.adj[u] >> (u + 1) << (u + 1)
            for v in bits(rest):
                yield (u, v)

    def edge_count(self) -> int:
        return sum(self.degree(v) for v in range(self.n)) // 2

    def edges_inside(self, subset: int) -> int:
        """e(G[subset]) by halved degree sum."""
        total = 0
        for v in bits(subset):
            total += (self.adj[v] & subset).bit_count()
        return total // 2

    def induced_subgraph(self, subset: int) -> tuple["Graph", list[int]]:
        """Induced subgraph plus the new-id -> old-id remap list."""
        if subset & ~self.full_mask:
            raise GraphError("subset contains out-of-range vertex ids")
        old_ids = list(bits(subset))
        new_of = {old: new for new, old in enumerate(old_ids)}
        rows = []
        for old in old_ids:
            row = 0
            for w in bits(self.adj[old] & subset):
                row |= 1 << new_of[w]
            rows.append(row)
        return Graph(len(old_ids), tuple(rows)), old_ids

    def is_clique(self, vertices: Sequence[int]) -> bool:
        vs = list(vertices)
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                if u == v or not self.has_edge(u, v):
                    return False
        return True


def make_clique(g: Graph, vertices: Iterable[int]) -> tuple[int, ...]:
    """Sorted clique vertex tuple, validated against the host graph."""
    vs = tuple(sorted(vertices))
    if not g.is_clique(vs):
        raise GraphError(f"{vs} is not a clique in the host graph")
    return vs


@dataclass(frozen=True)
class LabeledPartition:
    """Ordered partition {A_1,...,A_s,B} with the B class optional.

    `a_classes` are bitmasks; `b` is a bitmask or None when there is no
    B class (pure multipartite setting).  The partition may cover only a
    subset of the host graph's vertices (the pipeline works on shrinking
    residual partitions); `validate` checks disjointness and, when asked,
    exact cover of a ground set.
    """

    a_classes: tuple[int, ...]
    b: Optional[int] = None

    @property
    def s(self) -> int:
        return len(self.a_classes)

    @property
    def all_classes(self) -> tuple[int, ...]:
        if self.b is None:
            return self.a_classes
        return self.a_classes + (self.b,)

    @property
    def t(self) -> int:
        return len(self.all_classes)

    def labels(self) -> list[str]:
        out = [f"A_{i + 1}" for i in range(self.s)]
        if self.b is not None:
            out.append("B")
        return out

    def ground_mask(self) -> int:
        m = 0
        for c in self.all_classes:
            m |= c
        return m

    def validate(self, ground: Optional[int] = None) -> None:
        if self.s < 1:
            raise GraphError("partition needs at least one A class")
        seen = 0
        for c in self.all_classes:
            if seen & c:
                raise GraphError("partition classes overlap")
            seen |= c
        if ground is not None and seen != ground:
            raise GraphError("partition classes do not cover the ground set")

    def class_of(self, v: int) -> int:
        """Index into all_classes, or -1 if v is not covered."""
        for i, c in enumerate(self.all_classes):
            if c >> v & 1:
                return i
        return -1

    def restrict(self, keep: int) -> "LabeledPartition":
        """Partition of the classes intersected with `keep`."""
        return LabeledPartition(
            tuple(c & keep for c in self.a_classes),
            None if self.b is None else self.b & keep,
        )

    def to_json(self) -> dict:
        return {
            "a_classes": [sorted(bits(c)) for c in self.a_classes],
            "b": None if self.b is None else sorted(bits(self.b)),
        }

    @staticmethod
    def from_json(obj: dict) -> "LabeledPartition":
        a = tuple(mask_of(c) for c in obj["a_classes"])
        b = obj.get("b")
        return LabeledPartition(a, None if b is None else mask_of(b))


def index_vector(p: LabeledPartition, vertices: Iterable[int]) -> tuple[int, ...]:
    """Per-class intersection counts of a vertex set."""
    counts = [0] * p.t
    for v in vertices:
        i = p.class_of(v)
        if i < 0:
            raise GraphError(f"vertex {v} outside the partition ground set")
        counts[i] += 1
    return tuple(counts)


@dataclass(frozen=True)
class Tiling:
    """A set of pairwise vertex-disjoint cliques in a host graph."""

    cliques: tuple[tuple[int, ...], ...]

    def vertex_mask(self) -> int:
        m = 0
        for c in self.cliques:
            m |= mask_of(c)
        return m

    def size(self) -> int:
        return len(self.cliques)

    def validate(self, g: Graph) -> None:
        seen = 0
        for c in self.cliques:
            cm = mask_of(c)
            if cm.bit_count() != len(c):
                raise GraphError(f"repeated vertex in clique {c}")
            if seen & cm:
                raise GraphError("tiling cliques are not vertex-disjoint")
            if not g.is_clique(c):
                raise GraphError(f"{c} is not a clique in the host graph")
            seen |= cm

    def to_json(self, r: Optional[int] = None) -> dict:
        obj = {"cliques": [list(c) for c in self.cliques]}
        if r is not None:
            obj["r"] = r
        return obj

    @staticmethod
    def from_json(obj: dict) -> "Tiling":
        return Tiling(tuple(tuple(c) for c in obj["cliques"]))

    def union(self, other: "Tiling") -> "Tiling":
        return Tiling(self.cliques + other.cliques)


def is_perfect_factor(g: Graph, tiling: Tiling, r: int) -> bool:
    """True iff the tiling partitions V(g) into r-cliques."""
    try:
        tiling.validate(g)
    except GraphError:
        return False
    if any(len(c) != r for c in tiling.cliques):
        return False
    return tiling.vertex_mask() == g.full_mask


def tiling_to_json_str(tiling: Tiling, r: int) -> str:
    return json.dumps(tiling.to_json(r), sort_keys=True)

"""Shared helpers for the test suite: seeded random graphs and the
cross-complete partitioned instances the pipeline tests run on."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from tilinglab.graphs import Graph, LabeledPartition, mask_of


def random_graph(n: int, p: float, seed) -> Graph:
    """Erdos-Renyi style graph, deterministic per (n, p, seed)."""
    rng = random.Random(f"testgraph:{n}:{p}:{seed}")
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return Graph.from_edges(n, edges)


def cross_instance(
    r: int,
    s: int,
    n: int,
    sizes: Optional[Sequence[int]] = None,
    b_size: Optional[int] = None,
    a_edges: int = 1,
    drop_b_matching: int = 0,
    extra_edges: Sequence[tuple[int, int]] = (),
    seed: int = 0,
) -> tuple[Graph, LabeledPartition]:
    """A dense instance with an explicit labeled partition.

    s classes (default size n each) plus a B class (default size (r-s)n,
    empty when s == r).  All cross-class pairs are edges.  Each A class
    carries `a_edges` disjoint internal edges at its low ids; B is a
    clique minus an optional seeded matching of `drop_b_matching` edges.
    """
    if sizes is None:
        sizes = [n] * s
    sizes = list(sizes)
    if b_size is None:
        b_size = (r - s) * n
    total = sum(sizes) + b_size

    offsets = []
    acc = 0
    for sz in sizes:
        offsets.append(acc)
        acc += sz
    b_off = acc

    edges = []
    # complete cross edges between every pair of classes (B included)
    class_ranges = [range(off, off + sz) for off, sz in zip(offsets, sizes)]
    class_ranges.append(range(b_off, b_off + b_size))
    for i in range(len(class_ranges)):
        for j in range(i + 1, len(class_ranges)):
            for u in class_ranges[i]:
                for v in class_ranges[j]:
                    edges.append((u, v))
    # a few internal edges per A class
    for off, sz in zip(offsets, sizes):
        for k in range(min(a_edges, sz // 2)):
            edges.append((off + 2 * k, off + 2 * k + 1))
    # B is (nearly) a clique
    b_ids = list(range(b_off, b_off + b_size))
    dropped = set()
    if drop_b_matching:
        rng = random.Random(f"cross:{r}:{s}:{n}:{seed}")
        pool = list(b_ids)
        rng.shuffle(pool)
        for k in range(min(drop_b_matching, b_size // 2)):
            dropped.add(tuple(sorted((pool[2 * k], pool[2 * k + 1]))))
    for i, u in enumerate(b_ids):
        for v in b_ids[i + 1:]:
            if (u, v) not in dropped:
                edges.append((u, v))
    edges.extend(extra_edges)

    g = Graph.from_edges(total, set(tuple(sorted(e)) for e in edges))
    a_masks = tuple(
        mask_of(range(off, off + sz)) for off, sz in zip(offsets, sizes)
    )
    b_mask = mask_of(b_ids)
    return g, LabeledPartition(a_masks, b_mask)


def sharpness_instance() -> tuple[Graph, LabeledPartition]:
    """Tripartite graph with min cross-degree exactly (1-1/3)*3 = 2 and
    no transversal K_3-factor: a_i~b_j and a_i~c_k iff the indices
    differ, b_j~c_k iff k != pi(j) where pi swaps 0 and 1."""
    pi = {0: 1, 1: 0, 2: 2}
    edges = []
    for i in range(3):
        for j in range(3):
            if i != j:
                edges.append((i, 3 + j))
                edges.append((i, 6 + j))
    for j in range(3):
        for k in range(3):
            if k != pi[j]:
                edges.append((3 + j, 6 + k))
    g = Graph.from_edges(9, edges)
    p = LabeledPartition(
        (mask_of([0, 1, 2]), mask_of([3, 4, 5]), mask_of([6, 7, 8])), None
    )
    return g, p

"""Maximum matching in general graphs.

`maximum_matching` is a blossom-style augmenting-path search (base-array
contraction, O(V^3)); it is exact on arbitrary graphs, not only bipartite
ones, which the balance and repair steps require.  `brute_force_matching_
number` is a deliberately independent subset-recursion oracle for graphs of
desk size (<= ~20 vertices).
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache

from .graphs import Graph, Tiling, bits


def maximum_matching(g: Graph) -> Tiling:
    """A maximum-cardinality matching, returned as a K_2-tiling."""
    n = g.n
    adj = [sorted(bits(g.adj[v])) for v in range(n)]
    match = [-1] * n
    parent = [-1] * n
    base = list(range(n))
    used = [False] * n
    blossom = [False] * n

    def lca(a: int, b: int) -> int:
        mark = [False] * n
        while True:
            a = base[a]
            mark[a] = True
            if match[a] == -1:
                break
            a = parent[match[a]]
        while True:
            b = base[b]
            if mark[b]:
                return b
            b = parent[match[b]]

    def mark_path(v: int, b: int, child: int) -> None:
        while base[v] != b:
            blossom[base[v]] = True
            blossom[base[match[v]]] = True
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    def find_augmenting_path(root: int) -> bool:
        for i in range(n):
            used[i] = False
            parent[i] = -1
            base[i] = i
        used[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    cur = lca(v, to)
                    for i in range(n):
                        blossom[i] = False
                    mark_path(v, cur, to)
                    mark_path(to, cur, v)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        u = to
                        while u != -1:
                            pv = parent[u]
                            ppv = match[pv]
                            match[u] = pv
                            match[pv] = u
                            u = ppv
                        return True
                    used[match[to]] = True
                    queue.append(match[to])
        return False

    for v in range(n):
        if match[v] == -1:
            find_augmenting_path(v)
    edges = tuple(
        (v, match[v]) for v in range(n) if match[v] > v
    )
    return Tiling(edges)


def matching_number(g: Graph) -> int:
    return maximum_matching(g).size()


def brute_force_matching_number(g: Graph) -> int:
    """Independent oracle: recursion over the lowest active vertex."""

    adj = g.adj

    @lru_cache(maxsize=None)
    def best(active: int) -> int:
        if not active:
            return 0
        low = active & -active
        v = low.bit_length() - 1
        rest = active ^ low
        # v unmatched
        result = best(rest)
        for u in bits(adj[v] & rest):
            result = max(result, 1 + best(rest & ~(1 << u)))
        return result

    out = best(g.full_mask)
    best.cache_clear()
    return out

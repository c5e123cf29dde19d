import random

from conftest import random_graph

from tilinglab.graphs import Graph
from tilinglab.matching import (
    brute_force_matching_number,
    matching_number,
    maximum_matching,
)


def test_empty_and_singleton():
    assert matching_number(Graph(0, ())) == 0
    assert matching_number(Graph(1, (0,))) == 0


def test_single_edge_and_path():
    assert matching_number(Graph.from_edges(2, [(0, 1)])) == 1
    path5 = Graph.from_edges(5, [(i, i + 1) for i in range(4)])
    assert matching_number(path5) == 2


def test_odd_cycle_needs_blossom():
    # C_9 plus a chord pattern that defeats naive bipartite augmenting
    c9 = Graph.from_edges(9, [(i, (i + 1) % 9) for i in range(9)])
    assert matching_number(c9) == 4


def test_petersen_has_perfect_matching():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, 5 + i) for i in range(5)]
    g = Graph.from_edges(10, outer + inner + spokes)
    m = maximum_matching(g)
    m.validate(g)
    assert m.size() == 5


def test_matching_is_valid_tiling():
    g = random_graph(12, 0.4, seed="valid")
    m = maximum_matching(g)
    m.validate(g)
    assert all(len(e) == 2 for e in m.cliques)


def test_agrees_with_brute_force_oracle():
    for seed in range(40):
        rng = random.Random(f"match-oracle:{seed}")
        n = rng.randrange(2, 13)
        g = random_graph(n, rng.choice([0.15, 0.3, 0.5, 0.8]), seed)
        assert matching_number(g) == brute_force_matching_number(g), (
            f"disagreement on seed {seed}, n={n}"
        )

import pytest

from tilinglab.graphs import (
    Graph,
    GraphError,
    LabeledPartition,
    Tiling,
    bits,
    index_vector,
    is_perfect_factor,
    make_clique,
    mask_of,
    popcount,
)


def path4() -> Graph:
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


def test_bit_helpers():
    assert list(bits(0b10110)) == [1, 2, 4]
    assert mask_of([0, 3]) == 0b1001
    assert popcount(0b1011) == 3


def test_from_edges_and_accessors():
    g = path4()
    assert g.n == 4
    assert g.has_edge(0, 1) and g.has_edge(1, 0)
    assert not g.has_edge(0, 2)
    assert g.degree(1) == 2
    assert g.degree_into(1, mask_of([0, 3])) == 1
    assert g.min_degree() == 1 and g.max_degree() == 2
    assert g.edge_count() == 3
    assert sorted(g.edges()) == [(0, 1), (1, 2), (2, 3)]


def test_from_edges_rejects_bad_input():
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(0, 2)])
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(1, 1)])


def test_validate_catches_asymmetry():
    g = Graph(2, (0b10, 0b00))  # 0->1 present, 1->0 missing
    with pytest.raises(GraphError):
        g.validate()
    path4().validate()


def test_common_neighborhood_and_empty_convention():
    g = Graph.from_edges(4, [(0, 2), (1, 2), (0, 3), (1, 3)])
    assert g.common_neighborhood([0, 1], g.full_mask) == mask_of([2, 3])
    assert g.common_neighborhood([], mask_of([1, 2])) == mask_of([1, 2])


def test_edges_inside_and_induced_subgraph():
    g = path4()
    assert g.edges_inside(mask_of([0, 1, 2])) == 2
    sub, old = g.induced_subgraph(mask_of([1, 2, 3]))
    assert old == [1, 2, 3]
    assert sub.n == 3
    assert sorted(sub.edges()) == [(0, 1), (1, 2)]


def test_clique_checks():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
    assert g.is_clique([0, 1, 2])
    assert not g.is_clique([0, 1, 3])
    assert make_clique(g, [2, 1, 0]) == (0, 1, 2)
    with pytest.raises(GraphError):
        make_clique(g, [1, 2, 3])


def test_regularity_check():
    cycle = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert cycle.check_regular(2)
    assert not path4().check_regular(2)


def test_partition_basics():
    p = LabeledPartition((mask_of([0, 1]), mask_of([2])), mask_of([3, 4]))
    assert p.s == 2 and p.t == 3
    assert p.labels() == ["A_1", "A_2", "B"]
    assert p.ground_mask() == mask_of(range(5))
    p.validate(mask_of(range(5)))
    assert p.class_of(2) == 1 and p.class_of(4) == 2 and p.class_of(9) == -1
    restricted = p.restrict(mask_of([0, 3]))
    assert restricted.a_classes == (mask_of([0]), 0)
    assert restricted.b == mask_of([3])


def test_partition_validate_rejects_overlap_and_bad_cover():
    p = LabeledPartition((mask_of([0, 1]), mask_of([1, 2])), None)
    with pytest.raises(GraphError):
        p.validate()
    q = LabeledPartition((mask_of([0]),), mask_of([1]))
    with pytest.raises(GraphError):
        q.validate(mask_of([0, 1, 2]))


def test_partition_json_round_trip():
    p = LabeledPartition((mask_of([0, 2]),), mask_of([1]))
    assert LabeledPartition.from_json(p.to_json()) == p
    q = LabeledPartition((mask_of([0, 1]),), None)
    assert LabeledPartition.from_json(q.to_json()) == q


def test_index_vector():
    p = LabeledPartition((mask_of([0, 1]), mask_of([2, 3])), mask_of([4, 5]))
    assert index_vector(p, [0, 2, 4, 5]) == (1, 1, 2)
    with pytest.raises(GraphError):
        index_vector(p, [7])


def test_tiling_validate_and_union():
    g = Graph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
    t = Tiling(((0, 1), (2, 3)))
    t.validate(g)
    assert t.vertex_mask() == mask_of([0, 1, 2, 3])
    assert t.union(Tiling(((4, 5),))).size() == 3
    with pytest.raises(GraphError):
        Tiling(((0, 1), (1, 2))).validate(g)  # overlap
    with pytest.raises(GraphError):
        Tiling(((0, 2),)).validate(g)  # non-edge


def test_is_perfect_factor():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert is_perfect_factor(g, Tiling(((0, 1), (2, 3))), 2)
    assert not is_perfect_factor(g, Tiling(((0, 1),)), 2)  # misses vertices
    tri = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert is_perfect_factor(tri, Tiling(((0, 1, 2),)), 3)
    assert not is_perfect_factor(tri, Tiling(((0, 1, 2),)), 2)  # wrong order

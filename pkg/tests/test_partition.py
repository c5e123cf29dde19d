import pytest

from conftest import cross_instance, random_graph

from tilinglab.factor import InputError
from tilinglab.families import (
    gen_balanced_multipartite,
    gen_multipartite_plus_stars,
    gen_skew_multipartite,
)
from tilinglab.graphs import Graph, LabeledPartition, bits, mask_of
from tilinglab.partition import (
    PartitionParams,
    build_good_partition,
    classify_vertices,
    has_gamma_independent_set,
    min_edges_subset,
    verify_good_partition,
)


def params(r, n, alpha=0.2, beta=0.2, beta_prime=0.3, gamma=0.2):
    return PartitionParams(alpha=alpha, beta=beta, beta_prime=beta_prime,
                           gamma=gamma, n=n, r=r)


def test_params_validation():
    with pytest.raises(InputError):
        params(3, 4, alpha=0.0)
    with pytest.raises(InputError):
        PartitionParams(0.1, 0.1, 0.1, 0.1, n=0, r=3)
    p = params(3, 10, alpha=0.5)
    assert abs(p.good_threshold - 0.5 ** 0.2 * 10) < 1e-12


def test_min_edges_subset_exact_small():
    # K_4 plus two isolated vertices: the sparsest pair is the isolated one
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    g = Graph.from_edges(6, edges)
    res = min_edges_subset(g, 2)
    assert res.is_exact
    assert res.edges_inside == 0
    assert g.edges_inside(res.subset) == 0 and res.subset.bit_count() == 2
    res3 = min_edges_subset(g, 3)
    assert res3.edges_inside == 0  # two isolated + any one K_4 vertex
    assert min_edges_subset(g, 6).edges_inside == 6


def test_min_edges_subset_heuristic_above_ceiling():
    g = random_graph(12, 0.5, seed="sparse-heur")
    exact = min_edges_subset(g, 5)
    heur = min_edges_subset(g, 5, exact_ceiling=4)
    assert exact.is_exact and not heur.is_exact
    # the heuristic is a valid upper bound
    assert heur.edges_inside >= exact.edges_inside
    assert heur.subset.bit_count() == 5


def test_min_edges_subset_validation():
    with pytest.raises(InputError):
        min_edges_subset(Graph(3, (0, 0, 0)), 4)
    assert min_edges_subset(Graph(3, (0, 0, 0)), 0).subset == 0


def test_gamma_independent_tri_state():
    g = random_graph(10, 0.6, seed="gamma")
    yes = has_gamma_independent_set(g, 3, 0.9, 10)
    assert yes.found is True and yes.witness is not None
    assert g.edges_inside(yes.witness) <= 0.9 * 100
    no = has_gamma_independent_set(
        Graph.from_edges(4, [(u, v) for u in range(4) for v in range(u + 1, 4)]),
        3, 0.01, 4,
    )
    assert no.found is False  # exact search proved absence


def test_classify_vertices_on_planted_example():
    # one high-internal-degree vertex inside an otherwise sparse class
    g, p = cross_instance(3, 2, 6, a_edges=0,
                          extra_edges=[(0, k) for k in range(1, 5)])
    cls = classify_vertices(g, p, 0.2, 6)
    assert not (cls.good[0] >> 0 & 1)  # vertex 0 has internal degree 4 > 1.2
    assert cls.good[0] >> 5 & 1  # vertex 5 has internal degree 0
    # nobody is bad toward a class they see completely
    assert cls.bad[1] == 0


def test_classify_exceptional():
    # B vertex missing almost all of A_1 is exceptional
    g, p = cross_instance(3, 2, 4)
    b_v = next(iter(bits(p.b)))
    rows = list(g.adj)
    for a_v in list(bits(p.a_classes[0]))[:4]:
        rows[b_v] &= ~(1 << a_v)
        rows[a_v] &= ~(1 << b_v)
    g2 = Graph(g.n, tuple(rows))
    cls = classify_vertices(g2, p, 0.5, 4)
    assert cls.exceptional[2] >> b_v & 1


def test_verify_good_on_cross_instance():
    g, p = cross_instance(3, 2, 6)
    rep = verify_good_partition(g, p, params(3, 6))
    assert rep.is_good, rep.failing()
    assert not rep.inconclusive
    names = [v.condition for v in rep.verdicts]
    assert names == ["A1", "A2", "A3", "A4", "A5", "A6", "A7"]


def test_verify_flags_empty_exact_class():
    # an exact-size class with no internal edge breaks the edge-supply condition
    g, p = cross_instance(3, 2, 6, a_edges=0)
    rep = verify_good_partition(g, p, params(3, 6))
    assert rep.verdict("A2").passed is False
    assert rep.verdict("A2").witness["check"] == "not_empty"


def test_verify_complete_tripartite_k222_fails_a2():
    g, full_p = gen_balanced_multipartite(3, 2)
    p = LabeledPartition(full_p.a_classes[:2], full_p.a_classes[2])
    rep = verify_good_partition(g, p, params(3, 2))
    assert rep.verdict("A2").passed is False
    assert not rep.is_good


def test_verify_flags_oversized_class():
    g, p = cross_instance(3, 2, 6, sizes=[6, 9], b_size=3)
    rep = verify_good_partition(g, p, params(3, 6, alpha=0.1))
    assert rep.verdict("A1").passed is False
    assert rep.verdict("A1").witness["class"] == "A_2"


def test_verify_a7_witness_on_sparse_b():
    # B with no internal edges at all: the independent set is found exactly
    g, p = cross_instance(3, 1, 4)
    rows = list(g.adj)
    for u in bits(p.b):
        for v in bits(rows[u] & p.b):
            rows[u] &= ~(1 << v)
            rows[v] &= ~(1 << u)
    g2 = Graph(g.n, tuple(rows))
    rep = verify_good_partition(g2, p, params(3, 4, gamma=0.01))
    v = rep.verdict("A7")
    assert v.passed is False
    assert len(v.witness["set"]) == 4  # ceil(8 / 2)


def test_verify_requires_explicit_b():
    g, _ = gen_balanced_multipartite(3, 2)
    with pytest.raises(InputError):
        verify_good_partition(
            g, LabeledPartition((mask_of(range(6)),), None), params(3, 2)
        )


def test_build_good_partition_on_stars():
    g, canonical = gen_multipartite_plus_stars(3, 6)
    out = build_good_partition(g, params(3, 6))
    assert out.failure is None
    assert out.report.is_good
    # the parts of the construction are recovered (s = r, empty B)
    assert out.partition.b == 0
    assert sorted(out.partition.a_classes) == sorted(canonical.a_classes)


def test_build_good_partition_on_skew():
    g, _ = gen_skew_multipartite(3, 4)
    out = build_good_partition(g, params(3, 4, alpha=0.3, gamma=0.3))
    assert out.failure is None, out.failure
    assert out.report.is_good


def test_build_rejects_wrong_vertex_count():
    with pytest.raises(InputError):
        build_good_partition(Graph(7, (0,) * 7), params(3, 2))

import json

import pytest

from conftest import cross_instance

from tilinglab.factor import InputError
from tilinglab.families import gen_bipartite_plus_two_factor, gen_matching_in_parts
from tilinglab.graphs import (
    Graph,
    LabeledPartition,
    Tiling,
    bits,
    is_perfect_factor,
    mask_of,
)
from tilinglab.partition import PartitionParams, verify_good_partition
from tilinglab.pipeline import (
    STAGE_DIVISIBILITY_FIXED,
    STAGE_DONE,
    STAGE_FAILED,
    PipelineState,
    cover_bad_and_exceptional,
    factor_residual_B,
    fix_divisibility,
    prepare,
    run_pipeline,
    vertex_cover_sweep,
)


def params(r, n, alpha=0.2, beta=0.2, beta_prime=0.3, gamma=0.2):
    return PartitionParams(alpha=alpha, beta=beta, beta_prime=beta_prime,
                           gamma=gamma, n=n, r=r)


def assert_done(state, g, r):
    assert state.stage == STAGE_DONE, state.failure
    assert is_perfect_factor(g, state.factor, r)


def test_end_to_end_r3_s2():
    g, p = cross_instance(3, 2, 6)
    state = run_pipeline(g, p, params(3, 6))
    assert_done(state, g, 3)
    assert state.factor.size() == 6


def test_end_to_end_s_equals_r():
    g, p = cross_instance(3, 3, 4)
    state = run_pipeline(g, p, params(3, 4))
    assert_done(state, g, 3)


def test_end_to_end_s1():
    g, p = cross_instance(3, 1, 4)
    state = run_pipeline(g, p, params(3, 4))
    assert_done(state, g, 3)


def test_end_to_end_r4():
    g, p = cross_instance(4, 2, 4)
    state = run_pipeline(g, p, params(4, 4))
    assert_done(state, g, 4)


def test_rejects_non_good_partition():
    g, p = cross_instance(3, 2, 6, a_edges=0)  # empty exact parts break A2
    state = run_pipeline(g, p, params(3, 6))
    assert state.stage == STAGE_FAILED
    assert "A2" in state.failure


def test_planted_non_good_part_vertex_is_covered():
    # vertex 0 gets internal degree 4 > alpha^(1/5)*n, so stage 1 must
    # put it into a covering clique
    g, p = cross_instance(3, 2, 6, extra_edges=[(0, k) for k in range(2, 5)])
    pp = params(3, 6, alpha=0.1)
    assert verify_good_partition(g, p, pp).is_good
    state = run_pipeline(g, p, pp)
    assert_done(state, g, 3)
    covered = state.tilings["K"].vertex_mask()
    assert covered >> 0 & 1
    assert any(0 in c for c in state.tilings["Q"].cliques)


def test_planted_exceptional_b_vertex_is_covered():
    g, p = cross_instance(3, 2, 6)
    w = min(bits(p.b))
    rows = list(g.adj)
    removed = 0
    for a_v in sorted(bits(p.a_classes[0]))[2:]:  # keep only 2 edges into A_1
        rows[w] &= ~(1 << a_v)
        rows[a_v] &= ~(1 << w)
        removed += 1
    assert removed == 4
    g2 = Graph(g.n, tuple(rows))
    pp = params(3, 6, alpha=0.1)
    assert verify_good_partition(g2, p, pp).is_good
    state = run_pipeline(g2, p, pp)
    assert_done(state, g2, 3)
    assert any(w in c for c in state.tilings["T"].cliques)


def test_ledger_q_path():
    # |B| = 9 with r-s = 2 leaves residue q = 1; one H clique skips the
    # small class
    g, p = cross_instance(4, 2, 4, sizes=[4, 3], b_size=9)
    pp = params(4, 4)
    assert verify_good_partition(g, p, pp).is_good
    state = run_pipeline(g, p, pp)
    assert_done(state, g, 4)
    assert state.ledger.q == 1
    assert state.ledger.q_i == [1, 0]
    assert state.tilings["H"].size() == 1
    assert state.ledger.a == 0 and state.ledger.b == 0


def test_ledger_a_path_with_large_class():
    # an oversized class pays down a = 1 through one R clique on a
    # reserved matching edge
    g, p = cross_instance(3, 2, 7, sizes=[7, 8], b_size=6, a_edges=4)
    pp = params(3, 7)
    assert verify_good_partition(g, p, pp).is_good
    state = run_pipeline(g, p, pp)
    assert_done(state, g, 3)
    assert state.ledger.a == 1
    assert state.ledger.p_i == [1]
    assert state.tilings["R"].size() == 1
    # the R clique holds a whole matching edge of the large class
    (rc,) = state.tilings["R"].cliques
    large = state.partition.a_classes[1]
    assert len([v for v in rc if large >> v & 1]) == 2


def test_ledger_b_path_reserves_f_cliques():
    # B much larger than (r-s)n forces b = 1: two reserved K_3 copies
    # that the contraction turns into B* pairs
    g, p = cross_instance(3, 1, 5, sizes=[4], b_size=14)
    pp = params(3, 5, alpha=0.3)
    assert verify_good_partition(g, p, pp).is_good
    state = run_pipeline(g, p, pp)
    assert_done(state, g, 3)
    assert state.ledger.b == 1
    assert state.tilings["F"].size() == 2
    assert len(state.contracted.edge_cliques) == 2


def test_stage_order_is_enforced():
    g, p = cross_instance(3, 2, 6)
    state = prepare(g, p, params(3, 6))
    with pytest.raises(InputError):
        fix_divisibility(state)  # must cover first
    state = cover_bad_and_exceptional(state)
    with pytest.raises(InputError):
        cover_bad_and_exceptional(state)


def test_trace_is_json_lines_with_stages():
    g, p = cross_instance(3, 2, 6)
    state = run_pipeline(g, p, params(3, 6))
    lines = state.trace_jsonl().strip().splitlines()
    stages = [json.loads(ln)["stage"] for ln in lines]
    assert stages[0] == "init"
    assert stages[-1] == "done"
    assert "divisibility_fixed" in stages
    for ln in lines:
        entry = json.loads(ln)
        assert "ledger" in entry and "tiling_sizes" in entry


def _synthetic_state(g, p, pp, **kw):
    state = PipelineState(g, p, pp)
    state.stage = STAGE_DIVISIBILITY_FIXED
    state.matchings = kw.get("matchings", [Tiling(())] * p.s)
    state.u_mask = kw.get("u_mask", 0)
    state.b_residual = kw["b_residual"]
    if "F" in kw:
        state.tilings["F"] = kw["F"]
    return state


def test_repair_case1_burns_matching_edge():
    # A_1 = {0,1,2} with |A_1| = n = 3 and matching edge (0,1);
    # B'' = K_5 on {3..7} plus K_3 on {8,9,10}: two odd components
    edges = [(0, 1)]
    for a in range(3):
        for b in range(3, 11):
            edges.append((a, b))
    k5 = list(range(3, 8))
    for i, u in enumerate(k5):
        for v in k5[i + 1:]:
            edges.append((u, v))
    edges += [(8, 9), (8, 10), (9, 10)]
    g = Graph.from_edges(11, edges)
    p = LabeledPartition((mask_of([0, 1, 2]),), mask_of(range(3, 11)))
    state = _synthetic_state(
        g, p, params(3, 3),
        matchings=[Tiling(((0, 1),))],
        u_mask=mask_of([0, 1]),
        b_residual=mask_of(range(3, 11)),
    )
    state = factor_residual_B(state)
    assert state.stage != STAGE_FAILED, state.failure
    added = state.tilings["K"].cliques
    assert len(added) == 2
    # one clique consumed the matching edge plus a B vertex
    assert any(0 in c and 1 in c for c in added)
    # the other is the second component's triangle
    assert (8, 9, 10) in added
    # the rest of B'' now has a perfect matching
    mm = state.residual_b_factor
    assert mm.vertex_mask() == state.b_residual
    mm.validate(g)


def test_repair_case2_swaps_spare_triangle():
    # A_1 = {0,1,2} with |A_1| = 3 < n = 4; B'' = K_5 {3..7} + K_3 {8,9,10};
    # the reserved F triangle {11,12,13} touches the K_5 through edge (11,3)
    edges = []
    for a in range(3):
        for b in range(3, 14):
            edges.append((a, b))
    k5 = list(range(3, 8))
    for i, u in enumerate(k5):
        for v in k5[i + 1:]:
            edges.append((u, v))
    edges += [(8, 9), (8, 10), (9, 10)]
    edges += [(11, 12), (11, 13), (12, 13), (11, 3)]
    g = Graph.from_edges(14, edges)
    p = LabeledPartition((mask_of([0, 1, 2]),), mask_of(range(3, 14)))
    state = _synthetic_state(
        g, p, params(3, 4),
        b_residual=mask_of(range(3, 11)),
        F=Tiling(((11, 12, 13),)),
    )
    state = factor_residual_B(state)
    assert state.stage != STAGE_FAILED, state.failure
    # F now holds the triangle taken out of the far component
    assert state.tilings["F"].cliques == ((8, 9, 10),)
    # the spare triangle joined the residual and everything matches up
    assert state.b_residual == mask_of([3, 4, 5, 6, 7, 11, 12, 13])
    mm = state.residual_b_factor
    assert mm.vertex_mask() == state.b_residual
    mm.validate(g)


def test_relaxed_flag_is_off_by_default():
    g, p = cross_instance(3, 2, 6)
    state = prepare(g, p, params(3, 6))
    assert state.relaxed is False
    state2 = prepare(g, p, params(3, 6), relaxed=True)
    assert state2.relaxed is True


def test_vertex_cover_sweep_on_matching_family():
    g, _ = gen_matching_in_parts(3, 4)
    rep = vertex_cover_sweep(g, 3, 4, partitions=10, seed=0)
    assert rep.holds
    assert len(rep.per_trial_max) == 10
    assert rep.bound == pytest.approx(2 / 3)
    assert all(x >= 1 for x in rep.per_trial_max)
    # determinism
    rep2 = vertex_cover_sweep(g, 3, 4, partitions=10, seed=0)
    assert rep2.per_trial_max == rep.per_trial_max


def test_vertex_cover_sweep_regularity_gate():
    g, _ = gen_matching_in_parts(2, 4)
    extra = Graph.from_edges(g.n, list(g.edges()) + [(0, 2)])
    with pytest.raises(InputError):
        vertex_cover_sweep(extra, 2, 4, partitions=2)
    rep = vertex_cover_sweep(extra, 2, 4, partitions=2, allow_near_regular=True)
    assert rep.relaxation_used


def test_vertex_cover_sweep_on_bipartite_two_factor():
    g, _ = gen_bipartite_plus_two_factor(4)  # (n+1)-regular, r=2 scale
    rep = vertex_cover_sweep(g, 2, 4, partitions=5, seed=1)
    assert len(rep.per_trial_max) == 5

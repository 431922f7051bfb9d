import time

import numpy as np
import pytest

from dclose.closure import (
    all_follower_indegree_sums,
    closure_profiles,
    closure_trajectory,
    detect_closure,
    detect_closure_lists,
    detect_closure_stream,
    exhibits_closure_lists,
    final_ratio,
    final_ratios,
    follower_indegree_sums,
    k_linked_partition,
    select_celebrities,
    stabilization_index,
    undeterminable_edges,
)
from dclose.errors import GraphError, LabelError, MissingEdgeError
from dclose.graph import TemporalDigraph
from dclose.io import HandleMap, emit_list_file, parse_list_file

from helpers import brute_force_flags, brute_force_k, random_temporal_graph, write_lists


# ============== 闭包判定 ==============

def test_stream_flags_closing_edge(closed_triangle):
    np.testing.assert_array_equal(detect_closure_stream(closed_triangle), [False, False, True])


def test_stream_flags_shortcut_arriving_first():
    # A->C, A->B, B->C
    g = TemporalDigraph.from_pairs(3, [(0, 2), (0, 1), (1, 2)])
    np.testing.assert_array_equal(detect_closure_stream(g), [False, False, False])


def test_detectors_agree_with_brute_force_on_random_graphs():
    rng = np.random.default_rng(2024)
    started = time.perf_counter()
    for _ in range(200):
        n = int(rng.integers(2, 31))
        g = random_temporal_graph(rng, n, float(rng.uniform(0.02, 0.5)))
        expected = brute_force_flags(g)
        np.testing.assert_array_equal(detect_closure_stream(g), expected)
        np.testing.assert_array_equal(detect_closure_lists(g), expected)
    assert time.perf_counter() - started < 10


def test_list_file_detection_matches_stream(tmp_path):
    rng = np.random.default_rng(7)
    for i in range(20):
        g = random_temporal_graph(rng, 15, 0.3)
        stream = detect_closure_stream(g)
        path = tmp_path / f"g{i}.lists"
        handles = HandleMap.numbered(g.node_count)
        emit_list_file(g, path, handles)
        parsed, _ = parse_list_file(path, HandleMap.numbered(g.node_count))
        list_flags = detect_closure(parsed)
        by_pair = {(e.src, e.dst): list_flags[e.seq] for e in parsed.iter_edges()}
        assert {(e.src, e.dst): stream[e.seq] for e in g.iter_edges()} == by_pair


def test_list_criterion_finds_witness(tmp_path):
    path = write_lists(tmp_path / "star.lists", "in c: b1 b2 b3 a\nout a: b2 c\n")
    g, handles = parse_list_file(path)
    assert exhibits_closure_lists(g, handles.to_id("a"), handles.to_id("c"))


def test_list_criterion_first_follower_is_not_closed(tmp_path):
    path = write_lists(tmp_path / "first.lists", "in c: a b\nout a: b c\n")
    g, handles = parse_list_file(path)
    assert not exhibits_closure_lists(g, handles.to_id("a"), handles.to_id("c"))


def test_list_criterion_first_out_edge_is_not_closed(tmp_path):
    path = write_lists(tmp_path / "out.lists", "out a: c b\nin c: b a\n")
    g, handles = parse_list_file(path)
    assert not exhibits_closure_lists(g, handles.to_id("a"), handles.to_id("c"))


def test_list_criterion_reference_pair(tmp_path):
    path = write_lists(tmp_path / "pair.lists", "in C: B A\nout A: B C\n")
    g, handles = parse_list_file(path)
    assert exhibits_closure_lists(g, handles.to_id("a"), handles.to_id("c"))


def test_list_criterion_requires_edge(closed_triangle):
    with pytest.raises(MissingEdgeError):
        exhibits_closure_lists(closed_triangle, 2, 0)


def test_undeterminable_edges_are_reported(tmp_path):
    # b 既没有 in 列表也没有 out 列表，b->c 和 a->b 都无法判定
    path = write_lists(tmp_path / "partial.lists", "in c: b a\nout a: b c\n")
    g, handles = parse_list_file(path)
    seqs = undeterminable_edges(g)
    b, c = handles.to_id("b"), handles.to_id("c")
    a = handles.to_id("a")
    assert g.edge_seq(b, c) in seqs
    assert g.edge_seq(a, b) in seqs
    assert g.edge_seq(a, c) not in seqs
    assert undeterminable_edges(TemporalDigraph.from_pairs(2, [(1, 0)])) == set()


# ============== 闭包比例 ==============

def test_trajectory_arithmetic():
    g = TemporalDigraph.from_pairs(5, [(1, 0), (2, 0), (3, 0), (4, 0)])
    flags = np.array([False, True, True, False])
    np.testing.assert_allclose(closure_trajectory(g, flags, 0), [0, 1 / 2, 2 / 3, 1 / 2])
    np.testing.assert_array_equal(closure_trajectory(g, np.zeros(4, dtype=bool), 0), [0, 0, 0, 0])
    assert closure_trajectory(g, flags, 1).size == 0


def test_trajectory_rejects_wrong_flag_length(closed_triangle):
    with pytest.raises(GraphError):
        closure_trajectory(closed_triangle, np.zeros(2, dtype=bool), 2)


def test_final_ratios_match_per_node(rng):
    g = random_temporal_graph(rng, 25, 0.2)
    flags = detect_closure(g)
    ratios = final_ratios(g, flags)
    for v in range(g.node_count):
        assert ratios[v] == pytest.approx(final_ratio(g, flags, v))
        traj = closure_trajectory(g, flags, v)
        if traj.size:
            assert traj[-1] == pytest.approx(ratios[v])
            assert np.all((traj >= 0) & (traj <= 1))
        else:
            assert ratios[v] == 0


def test_stabilization_index():
    assert stabilization_index(np.array([0, 0.5, 0.6, 0.5, 0.5]), 0.02) == 3
    assert stabilization_index(np.array([0.5, 0.5]), 0.02) == 0
    assert stabilization_index(np.array([]), 0.02) is None


# ============== k-linked ==============

def test_k_linked_partition_three_linked(k3_star):
    stats = {s.k: s for s in k_linked_partition(k3_star, 0)}
    assert stats[3].members == frozenset({4})
    assert stats[3].f_k == 1.0
    assert stats[0].members == frozenset({1, 2, 3})
    assert stats[0].f_k == 0.0


def test_k_linked_partition_zero_linked():
    g = TemporalDigraph.from_pairs(3, [(1, 0), (2, 0)])
    stats = k_linked_partition(g, 0)
    assert [(s.k, s.members) for s in stats] == [(0, frozenset({1, 2}))]


def test_k_linked_arrival_mode_counts_earlier_followers():
    # C=0；B1=1、B2=2 在 A=4 之前关注 C，B3=3 在之后
    # A 在 A->C 之前只关注了 B1，B2、B3 都是之后才关注的
    pairs = [(1, 0), (2, 0), (4, 1), (4, 0), (3, 0), (4, 2), (4, 3)]
    g = TemporalDigraph.from_pairs(5, pairs)
    final = {s.k: s.members for s in k_linked_partition(g, 0, k_mode="final")}
    arrival = {s.k: s.members for s in k_linked_partition(g, 0, k_mode="arrival")}
    assert 4 in final[3]
    assert 4 in arrival[1]
    with pytest.raises(ValueError):
        k_linked_partition(g, 0, k_mode="sometime")


def test_k_linked_arrival_mode_ignores_later_follow_of_intermediate():
    # B->C, A->C, A->B
    g = TemporalDigraph.from_pairs(3, [(1, 0), (2, 0), (2, 1)])
    final = {a: s.k for s in k_linked_partition(g, 0) for a in s.members}
    arrival = {a: s.k for s in k_linked_partition(g, 0, k_mode="arrival") for a in s.members}
    assert final[2] == 1
    assert arrival[2] == 0


@pytest.mark.parametrize("out_a, expected", [("c b", 0), ("b c", 1)])
def test_k_linked_arrival_mode_on_lists_uses_out_position(tmp_path, out_a, expected):
    path = write_lists(tmp_path / "data.lists", f"in c: b a\nout a: {out_a}\n")
    g, handles = parse_list_file(path)
    a, c = handles.to_id("a"), handles.to_id("c")
    arrival = {v: s.k for s in k_linked_partition(g, c, k_mode="arrival") for v in s.members}
    final = {v: s.k for s in k_linked_partition(g, c) for v in s.members}
    assert arrival[a] == expected
    assert final[a] == 1


@pytest.mark.parametrize("k_mode", ["final", "arrival"])
def test_k_linked_partition_matches_brute_force(k_mode):
    rng = np.random.default_rng(2024)
    for _ in range(50):
        g = random_temporal_graph(rng, 30, float(rng.uniform(0.05, 0.4)))
        flags = detect_closure(g)
        for node in g.top_by_in_degree(3):
            expected = brute_force_k(g, node, arrival=(k_mode == "arrival"))
            got = {a: s.k for s in k_linked_partition(g, node, flags, k_mode=k_mode) for a in s.members}
            assert got == expected


def test_k_linked_counts_add_up_to_final_ratio():
    rng = np.random.default_rng(77)
    for _ in range(50):
        g = random_temporal_graph(rng, 30, float(rng.uniform(0.05, 0.4)))
        flags = detect_closure(g)
        for node in range(g.node_count):
            stats = k_linked_partition(g, node, flags)
            degree = g.in_degree(node)
            assert sum(len(s.members) for s in stats) == degree
            weighted = sum(s.f_k * len(s.members) for s in stats)
            assert weighted == pytest.approx(final_ratio(g, flags, node) * degree)
            in_seqs = np.asarray(g.in_seqs(node), dtype=np.int64)
            assert sum(s.closed for s in stats) == int(flags[in_seqs].sum())


def test_prefix_flags_match_full_stream():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = random_temporal_graph(rng, 15, 0.3)
        full = detect_closure_stream(g)
        pairs = [(e.src, e.dst) for e in g.edges]
        for m in range(0, len(pairs) + 1, max(1, len(pairs) // 7)):
            prefix = TemporalDigraph.from_pairs(g.node_count, pairs[:m])
            np.testing.assert_array_equal(detect_closure_stream(prefix), full[:m])


def test_k_linked_exclude_drops_from_denominator(k3_star):
    flags = detect_closure(k3_star)
    a_to_c = k3_star.edge_seq(4, 0)
    stats = {s.k: s for s in k_linked_partition(k3_star, 0, flags, exclude={a_to_c})}
    assert stats[3].members == frozenset({4})
    assert stats[3].counted == 0
    assert stats[3].f_k is None


def test_zero_linked_followers_never_close():
    rng = np.random.default_rng(99)
    for _ in range(30):
        g = random_temporal_graph(rng, 20, 0.25)
        flags = detect_closure(g)
        for c in range(g.node_count):
            for stat in k_linked_partition(g, c, flags):
                if stat.k == 0:
                    assert stat.closed == 0


# ============== 关注者入度和 ==============

def test_follower_indegree_sums():
    # c=0 的关注者 x=1, y=2；x 入度 3，y 入度 5
    pairs = [(1, 0), (2, 0)]
    pairs += [(v, 1) for v in (3, 4, 5)]
    pairs += [(v, 2) for v in (3, 4, 5, 6, 7)]
    g = TemporalDigraph.from_pairs(8, pairs, communities=[0, 0, 1, 0, 0, 0, 0, 0])
    assert follower_indegree_sums(g, 0) == (8, None)
    assert follower_indegree_sums(g, 0, same_community=True) == (8, 3)
    assert follower_indegree_sums(g, 7, same_community=True) == (0, 0)


def test_same_community_sum_requires_labels(closed_triangle):
    with pytest.raises(LabelError):
        follower_indegree_sums(closed_triangle, 2, same_community=True)
    with pytest.raises(LabelError):
        all_follower_indegree_sums(closed_triangle, same_community=True)


def test_vectorized_sums_match_per_node(rng):
    g = random_temporal_graph(rng, 30, 0.15)
    g.communities = rng.integers(0, 3, size=g.node_count).tolist()
    total, same = all_follower_indegree_sums(g, same_community=True)
    for v in range(g.node_count):
        assert (int(total[v]), int(same[v])) == follower_indegree_sums(g, v, same_community=True)


def test_select_celebrities_is_closed_interval():
    pairs = [(v, 0) for v in range(1, 4)] + [(v, 1) for v in range(2, 4)] + [(3, 2)]
    g = TemporalDigraph.from_pairs(4, pairs)
    assert select_celebrities(g, 1, 2) == [1, 2]
    assert select_celebrities(g, 3, 3) == [0]


def test_closure_profiles_parallel_matches_serial(rng):
    g = random_temporal_graph(rng, 25, 0.2)
    flags = detect_closure(g)
    nodes = g.top_by_in_degree(10)
    serial = closure_profiles(g, flags, nodes)
    parallel = closure_profiles(g, flags, nodes, workers=4)
    assert [p.node for p in parallel] == nodes
    for a, b in zip(serial, parallel):
        assert a.final_ratio == b.final_ratio
        np.testing.assert_array_equal(a.trajectory, b.trajectory)
        assert a.follower_indegree_sum == b.follower_indegree_sum

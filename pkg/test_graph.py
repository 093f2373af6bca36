"""Sampling, collapsing, truncation and edge-list IO."""

import io
import math
from collections import Counter

import numpy as np
import pytest

from paspectra.core.exact import enumerate_process
from paspectra.core.graph import (
    GraphConfig,
    TruncationSpec,
    collapse,
    degrees,
    edge_list_text,
    generate,
    generate_g1,
    graph_from_edges,
    read_edge_list,
    replicate_seed,
    scaled_vertex_degree,
    second_degree_moment,
    top_degrees,
    truncate,
    truncate_first,
    verify_degree_sums,
    verify_out_degree_cap,
    write_edge_list,
)


def test_first_step_is_a_loop():
    g = generate_g1(1, seed=123)
    assert g.edges() == [(1, 1)]
    assert g.degree_array().tolist() == [2]


def test_same_seed_same_graph():
    a = generate(GraphConfig(m=3, n=400, seed=9))
    b = generate(GraphConfig(m=3, n=400, seed=9))
    assert np.array_equal(a.low, b.low) and np.array_equal(a.high, b.high)
    c = generate(GraphConfig(m=3, n=400, seed=10))
    assert not np.array_equal(a.low, c.low)


def test_prefix_degree_sums_are_twice_the_step():
    for seed in range(5):
        assert verify_degree_sums(generate_g1(500, seed))
    assert verify_degree_sums(graph_from_edges(3, [(1, 1), (1, 2), (2, 3)]))


def test_degree_sum_check_catches_edges_to_unborn_vertices():
    # edge 2 points at vertex 3 before step 3 exists
    assert not verify_degree_sums(graph_from_edges(3, [(1, 1), (1, 3), (2, 3)]))
    assert not verify_degree_sums(generate(GraphConfig(m=2, n=10, seed=0)))


def test_every_vertex_sends_exactly_m_edges_backwards():
    g = generate(GraphConfig(m=3, n=200, seed=1))
    assert g.num_edges == 600
    assert verify_out_degree_cap(g)
    assert int(g.degree_array().sum()) == 2 * g.num_edges


def test_second_vertex_attaches_to_first_with_probability_two_thirds():
    hits = sum(generate_g1(2, seed).edges()[1] == (1, 2) for seed in range(3000))
    assert abs(hits / 3000 - 2 / 3) < 0.03


@pytest.mark.parametrize("n", [2, 3])
def test_outcome_frequencies_match_the_atlas(n):
    draws = 6000
    counts = Counter(tuple(generate_g1(n, seed).low.tolist()) for seed in range(draws))
    atlas = enumerate_process(n)
    assert set(counts) <= {tuple(row) for row in atlas.choices.tolist()}
    for row, prob in zip(atlas.choices.tolist(), atlas.numerators.tolist()):
        p = prob / atlas.denominator
        stderr = math.sqrt(p * (1 - p) / draws)
        # 3.5 standard errors over at most 6 outcomes
        assert abs(counts[tuple(row)] / draws - p) <= 3.5 * stderr, row


def test_collapse_merges_consecutive_groups():
    g1 = graph_from_edges(4, [(1, 1), (1, 2), (1, 3), (3, 4)])
    g = collapse(g1, 2)
    assert g.n == 2
    assert g.edges() == [(1, 1), (1, 1), (1, 2), (2, 2)]


def test_collapse_rejects_uneven_groups():
    with pytest.raises(ValueError, match="divisible"):
        collapse(generate_g1(5, 0), 2)


def test_invalid_parameters_are_rejected():
    with pytest.raises(ValueError):
        GraphConfig(m=0, n=10)
    with pytest.raises(ValueError):
        TruncationSpec(epsilon=1.0)
    with pytest.raises(ValueError):
        generate_g1(0, 0)


def test_truncation_cut_rounds_up_without_float_noise():
    assert TruncationSpec(epsilon=0.3).cut(10) == 3
    assert TruncationSpec(epsilon=0.25).cut(10) == 3
    assert TruncationSpec(epsilon=0.1).cut(200000) == 20000


def test_truncate_drops_old_vertices_and_their_edges():
    g = generate(GraphConfig(m=2, n=100, seed=4))
    h = truncate(g, 0.1)
    assert h.vertex_offset == 11
    assert h.num_vertices == 90
    assert h.low.min() > 10
    kept = np.count_nonzero(g.low > 10)
    assert h.num_edges == kept


@pytest.mark.parametrize("n, eps", [(1, 0.5), (10, 0.95)])
def test_truncating_every_vertex_leaves_an_empty_graph(n, eps):
    h = truncate(generate(GraphConfig(m=2, n=n, seed=3)), eps)
    assert h.num_vertices == 0 and h.num_edges == 0
    assert h.vertex_offset == n + 1
    assert degrees(h) == []


def test_truncate_nothing_is_identity():
    g = generate(GraphConfig(m=2, n=50, seed=4))
    assert truncate_first(g, 0) is g


def test_degrees_count_loops_twice():
    g = graph_from_edges(3, [(1, 1), (1, 2), (2, 3)])
    assert degrees(g) == [(1, 3), (2, 2), (3, 1)]
    assert second_degree_moment(g) == 9 + 4 + 1


def test_top_degrees_break_ties_by_label():
    g = graph_from_edges(4, [(1, 2), (3, 4)])
    top = top_degrees(g, 2)
    assert top.values == [1, 1]
    assert top.vertices == [1, 2]
    assert not top.truncated


def test_top_degrees_more_than_vertices_is_flagged():
    g = graph_from_edges(2, [(1, 2)])
    top = top_degrees(g, 5)
    assert top.truncated
    assert len(top.values) == 2


def test_scaled_vertex_degree():
    g = graph_from_edges(4, [(1, 1), (1, 2), (1, 3), (1, 4)])
    assert scaled_vertex_degree(g, 1) == pytest.approx(5 * 0.5)
    with pytest.raises(ValueError):
        scaled_vertex_degree(g, 5)


def test_edge_list_text_round_trip():
    g = generate(GraphConfig(m=2, n=30, seed=5))
    text = edge_list_text(g)
    assert text.startswith("pa 2 30 5 1\n")
    back = read_edge_list(io.StringIO(text))
    assert edge_list_text(back) == text
    assert back.seed == 5 and back.m == 2


def test_edge_list_file(tmp_path):
    g = truncate(generate(GraphConfig(m=1, n=20, seed=2)), 0.2)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    back = read_edge_list(path)
    assert back.vertex_offset == g.vertex_offset
    assert back.edges() == g.edges()


def test_edge_list_errors_name_the_line():
    with pytest.raises(ValueError, match="line 1"):
        read_edge_list(io.StringIO("graph 1 2 3 4\n"))
    with pytest.raises(ValueError, match="line 3"):
        read_edge_list(io.StringIO("pa 1 2 0 1\n1 1\n1\n"))


def test_replicate_seed_wraps_to_64_bits():
    assert replicate_seed(5, 3) == 8
    assert replicate_seed(2**64 - 1, 1) == 0

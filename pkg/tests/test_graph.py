import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from regclique.graph import (ErParams, Graph, OracleLimitError, Partition, balanced_partition, bits,
                             clique_number, common_neighbourhood, has_k_clique, has_transversal_clique,
                             mask_of, max_clique_brute, pair_index, read_dimacs_graph, sample_er,
                             write_dimacs_graph)

from conftest import all_graphs, brute_clique_number, brute_transversal, graphs, graphs_with_partition


def test_constructors_are_symmetric_and_loop_free():
    for g in (Graph.complete(5), Graph.cycle(5), Graph.path(4), Graph.empty(3),
              Graph.complete_multipartite([[0, 1], [2], [3, 4]])):
        for v in range(g.n):
            assert not g.has_edge(v, v)
            for u in range(g.n):
                assert g.has_edge(u, v) == g.has_edge(v, u)


def test_invalid_adjacency_rejected():
    with pytest.raises(ValueError):
        Graph(2, (0b10, 0))
    with pytest.raises(ValueError):
        Graph(1, (0b1,))
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])


def test_complete_multipartite():
    g = Graph.complete_multipartite([[0, 1], [2, 3]])
    assert sorted(g.edges()) == [(0, 2), (0, 3), (1, 2), (1, 3)]


def test_er_probability_formula():
    assert ErParams(16, 5, 1.0).p == pytest.approx(0.25, abs=1e-15)
    assert ErParams(16, 5, 1.0).delta == 0.5


def test_er_extremes():
    assert sample_er(n=4, p=1.0, seed=7).num_edges == 6
    assert sample_er(n=10, p=0.0, seed=7).num_edges == 0
    with pytest.raises(ValueError):
        sample_er(n=4, p=1.5)


def test_er_reproducible_and_prefix_consistent():
    a = sample_er(n=30, p=0.3, seed=11)
    assert a == sample_er(n=30, p=0.3, seed=11)
    assert a != sample_er(n=30, p=0.3, seed=12)
    # decisions are keyed by pair, so a smaller sample is an induced subgraph
    small = sample_er(n=20, p=0.3, seed=11)
    assert small == a.induced(range(20))[0]


def test_er_frozen_edges():
    # frozen from the Philox stream; guards against generator drift
    g = sample_er(n=8, p=0.5, seed=2024)
    u = np.random.Generator(np.random.Philox(key=2024)).random(28)
    expect = sorted((a, b) for a, b in itertools.combinations(range(8), 2) if u[pair_index(a, b)] < 0.5)
    assert sorted(g.edges()) == expect


def test_er_edge_frequency():
    count = sum(sample_er(n=40, p=0.2, seed=s).num_edges for s in range(20))
    trials = 20 * 780
    assert abs(count / trials - 0.2) < 4 * (0.2 * 0.8 / trials) ** 0.5


def test_common_neighbourhood_examples():
    assert common_neighbourhood(Graph.complete(4), {0}, range(4)) == {1, 2, 3}
    assert common_neighbourhood(Graph.path(3), {0, 2}, range(3)) == {1}
    assert common_neighbourhood(Graph.empty(8), set(), {5, 7}) == {5, 7}


@given(graphs(), st.data())
def test_common_neighbourhood_antitone(g, data):
    r = data.draw(st.sets(st.integers(0, max(g.n - 1, 0)), max_size=g.n)) if g.n else set()
    extra = data.draw(st.sets(st.integers(0, max(g.n - 1, 0)), max_size=g.n)) if g.n else set()
    w = range(g.n)
    assert common_neighbourhood(g, r | extra, w) <= common_neighbourhood(g, r, w)


def test_max_clique_examples():
    assert len(max_clique_brute(Graph.complete(5))) == 5
    assert len(max_clique_brute(Graph.cycle(5))) == 2
    g = sample_er(n=20, p=0.5, seed=3)
    assert clique_number(g) == brute_clique_number(g)
    assert g.is_clique(max_clique_brute(g))


def test_oracle_limit():
    with pytest.raises(OracleLimitError):
        max_clique_brute(Graph.empty(50))


@pytest.mark.parametrize("n", range(0, 6))
def test_clique_oracle_exhaustive_small(n):
    for g in all_graphs(n):
        w = brute_clique_number(g)
        assert clique_number(g) == w
        for k in range(1, n + 2):
            assert has_k_clique(g, k) == (k <= w)


@given(graphs(min_n=6, max_n=8))
def test_clique_oracle_matches_networkx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    assert clique_number(g) == max(len(c) for c in nx.find_cliques(h))


def test_transversal_examples():
    assert has_transversal_clique(Graph.complete(4), Partition((frozenset({0, 1}), frozenset({2, 3}))))
    assert not has_transversal_clique(Graph.empty(4), balanced_partition(4, 2))
    c4 = Graph.cycle(4)
    assert has_transversal_clique(c4, Partition((frozenset({0, 2}), frozenset({1, 3}))))


@given(graphs_with_partition())
def test_transversal_matches_brute(gp):
    g, part = gp
    assert has_transversal_clique(g, part) == brute_transversal(g, part)


def test_balanced_partition_examples():
    assert balanced_partition(5, 2).blocks == (frozenset({0, 1, 2}), frozenset({3, 4}))
    assert [len(b) for b in balanced_partition(6, 3).blocks] == [2, 2, 2]
    assert [len(b) for b in balanced_partition(7, 3).blocks] == [3, 2, 2]
    with pytest.raises(ValueError):
        balanced_partition(3, 4)


@given(st.integers(1, 30), st.data())
def test_balanced_partition_invariant(n, data):
    k = data.draw(st.integers(1, n))
    p = balanced_partition(n, k)
    p.check(n)
    assert p.is_balanced() and p.k == k


@given(graphs())
def test_dimacs_graph_round_trip(g):
    assert read_dimacs_graph(write_dimacs_graph(g, ["note"])) == g


def test_dimacs_graph_bad_input():
    with pytest.raises(ValueError):
        read_dimacs_graph("e 1 2\n")
    with pytest.raises(ValueError):
        read_dimacs_graph("p edge 2 1\ne 1 3\n")


def test_bitmask_helpers():
    assert mask_of([0, 3]) == 0b1001
    assert list(bits(0b10110)) == [1, 2, 4]

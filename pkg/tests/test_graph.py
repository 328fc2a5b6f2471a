import logging

import numpy as np
import pytest

from sclrl.graph import Graph, NodeSet, build_graph
from helpers import dense_from_edges, random_edge_list, random_graph


def test_build_drops_duplicates_and_self_loops(caplog):
    feats = np.zeros((2, 3), dtype=np.float32)
    with caplog.at_level(logging.WARNING, logger="sclrl.graph"):
        g = build_graph([(0, 1), (1, 0), (1, 1)], feats)
    assert g.num_edges == 1
    assert g.has_edge(0, 1)
    assert "1 self-loop(s) and 1 duplicate edge(s)" in caplog.text


def test_build_empty_graph():
    g = build_graph([], np.zeros((3, 2), dtype=np.float32))
    assert g.num_nodes == 3
    assert g.num_edges == 0
    assert np.all(g.degrees == 0)


def test_build_errors():
    feats = np.zeros((3, 1), dtype=np.float32)
    with pytest.raises(ValueError, match="out of range"):
        build_graph([(0, 3)], feats)
    with pytest.raises(ValueError, match="does not match"):
        build_graph([(0, 1)], feats, num_nodes=4)


def test_neighbor_lists_sorted_and_degrees_consistent():
    rng = np.random.default_rng(0)
    g, _ = random_graph(40, 0.15, 4, rng)
    for u in range(g.num_nodes):
        nbrs = g.neighbors(u)
        assert np.all(np.diff(nbrs) > 0)
        assert g.degrees[u] == nbrs.size
    assert int(g.degrees.sum()) == 2 * g.num_edges


def test_has_edge_triangle():
    g = build_graph([(0, 1), (1, 2), (0, 2)], np.zeros((3, 1), dtype=np.float32))
    assert g.has_edge(0, 1)
    assert g.has_edge(1, 0)
    assert not g.has_edge(0, 0)
    with pytest.raises(ValueError, match="out of range"):
        g.has_edge(0, 5)


def test_has_edge_agrees_with_dense_oracle():
    rng = np.random.default_rng(1)
    g, dense = random_graph(50, 0.1, 2, rng)
    for u in range(50):
        for v in range(50):
            assert g.has_edge(u, v) == bool(dense[u, v])


def test_has_edge_symmetric_exhaustive():
    rng = np.random.default_rng(2)
    for _ in range(5):
        n = int(rng.integers(2, 101))
        g, _ = random_graph(n, 0.08, 1, rng)
        for u in range(n):
            for v in range(u, n):
                assert g.has_edge(u, v) == g.has_edge(v, u)


def test_induced_subgraph_full_set_is_dense_adjacency():
    rng = np.random.default_rng(3)
    g, dense = random_graph(20, 0.2, 3, rng)
    adj, feats = g.induced_subgraph(range(20))
    assert np.array_equal(adj, dense.astype(np.float32))
    assert np.array_equal(feats, g.features)


def test_induced_subgraph_non_adjacent_pair():
    g = build_graph([(0, 1), (1, 2)], np.arange(6, dtype=np.float32).reshape(3, 2))
    adj, feats = g.induced_subgraph([0, 2])
    assert np.all(adj == 0)
    assert np.array_equal(feats, g.features[[0, 2]])


def test_induced_subgraph_matches_pairwise_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 51))
        g, _ = random_graph(n, 0.15, 2, rng)
        k = int(rng.integers(1, n + 1))
        nodes = rng.choice(n, size=k, replace=False).tolist()
        adj, feats = g.induced_subgraph(nodes)
        for p in range(k):
            for q in range(k):
                assert adj[p, q] == (1.0 if g.has_edge(nodes[p], nodes[q]) else 0.0)
        assert np.array_equal(feats, g.features[nodes])


def test_induced_subgraph_order_equivariant():
    rng = np.random.default_rng(5)
    g, _ = random_graph(30, 0.2, 4, rng)
    nodes = rng.choice(30, size=8, replace=False).tolist()
    perm = rng.permutation(8)
    adj_a, feats_a = g.induced_subgraph(nodes)
    adj_b, feats_b = g.induced_subgraph([nodes[i] for i in perm])
    assert np.array_equal(adj_b, adj_a[np.ix_(perm, perm)])
    assert np.array_equal(feats_b, feats_a[perm])


def test_induced_subgraph_errors():
    g = build_graph([(0, 1)], np.zeros((2, 1), dtype=np.float32))
    with pytest.raises(ValueError, match="empty"):
        g.induced_subgraph([])
    with pytest.raises(ValueError, match="duplicate"):
        g.induced_subgraph([0, 0])


def test_graph_arrays_read_only():
    g = build_graph([(0, 1)], np.zeros((2, 1), dtype=np.float32))
    with pytest.raises(ValueError):
        g.indices[0] = 5
    with pytest.raises(ValueError):
        g.features[0, 0] = 1.0


def test_nodeset_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        NodeSet([1, 1, 2])

from collections import deque

import numpy as np
import pytest

from sclrl.graph import build_graph
from sclrl.links import Link, NEGATIVE, POSITIVE, split_links, sample_links
from sclrl.subgraph import (SamplerConfig, extract_all, extract_slci,
                            sample_neighborhood)
from helpers import dense_from_edges, random_edge_list, random_graph


def neighborhood_oracle(dense, u, v, hops, ks):
    """Brute-force recursive top-k sampling via full sorting on a dense matrix."""
    degrees = dense.sum(axis=1)
    prev = {u, v}
    picked = {u, v}
    for t in range(hops):
        cur = set()
        for node in prev:
            nbrs = [w for w in range(dense.shape[0]) if dense[node, w]]
            ranked = sorted(nbrs, key=lambda w: (-degrees[w], w))
            cur.update(ranked[:ks[t]])
        picked |= cur
        prev = cur
    return picked


def bfs_distances(dense, source):
    n = dense.shape[0]
    dist = [None] * n
    dist[source] = 0
    q = deque([source])
    while q:
        x = q.popleft()
        for y in range(n):
            if dense[x, y] and dist[y] is None:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(hops=0, k_per_hop=())
    with pytest.raises(ValueError):
        SamplerConfig(hops=2, k_per_hop=(3,))
    with pytest.raises(ValueError):
        SamplerConfig(hops=1, k_per_hop=(0,))
    assert SamplerConfig(hops=1, k_per_hop=(3,)).max_nodes == 8
    assert SamplerConfig(hops=2, k_per_hop=(3, 1)).max_nodes == 14


def test_isolated_endpoints_give_pair_only():
    g = build_graph([], np.zeros((4, 2), dtype=np.float32))
    ns = sample_neighborhood(g, Link(0, 2, NEGATIVE), SamplerConfig(1, (3,)))
    assert list(ns) == [0, 2]


def test_star_example_hand_enumerated():
    # center 0 adjacent to leaves 1..4; link (0, 1), one hop, keep 2
    g = build_graph([(0, 1), (0, 2), (0, 3), (0, 4)],
                    np.zeros((5, 1), dtype=np.float32))
    ns = sample_neighborhood(g, Link(0, 1, POSITIVE), SamplerConfig(1, (2,)))
    # hop 1 = top-2 of {1,2,3,4} (all degree 1, ties ascending) union {0}
    assert list(ns) == [0, 1, 2]


def test_neighborhood_matches_oracle():
    rng = np.random.default_rng(20)
    for _ in range(40):
        n = int(rng.integers(4, 51))
        edges = random_edge_list(n, 0.15, rng)
        g = build_graph(edges, np.zeros((n, 1), dtype=np.float32))
        dense = dense_from_edges(n, edges)
        hops = int(rng.integers(1, 3))
        ks = tuple(int(rng.integers(1, 5)) for _ in range(hops))
        u, v = rng.choice(n, size=2, replace=False)
        link = Link(int(u), int(v), POSITIVE if dense[u, v] else NEGATIVE)
        got = set(sample_neighborhood(g, link, SamplerConfig(hops, ks)))
        want = neighborhood_oracle(dense, link.u, link.v, hops, ks)
        assert got == want


def test_extract_negative_isolated_pair():
    g = build_graph([], np.ones((3, 2), dtype=np.float32))
    s = extract_slci(g, Link(0, 2, NEGATIVE), SamplerConfig(1, (3,)))
    assert s.size == 2
    assert np.all(s.adj == 0)
    assert s.label == NEGATIVE


def test_extract_triangle_removes_center_edge():
    g = build_graph([(0, 1), (1, 2), (0, 2)], np.zeros((3, 1), dtype=np.float32))
    s = extract_slci(g, Link(0, 1, POSITIVE), SamplerConfig(1, (3,)))
    assert s.size == 3
    want = np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]], dtype=np.float32)
    assert np.array_equal(s.adj, want)


def test_center_entry_always_zero_and_size_bounded():
    rng = np.random.default_rng(21)
    cfg = SamplerConfig(1, (3,))
    for _ in range(10):
        n = int(rng.integers(5, 41))
        g, dense = random_graph(n, 0.2, 2, rng)
        for _ in range(5):
            u, v = rng.choice(n, size=2, replace=False)
            link = Link(int(u), int(v), POSITIVE if dense[u, v] else NEGATIVE)
            s = extract_slci(g, link, cfg)
            assert s.adj[0, 1] == 0 and s.adj[1, 0] == 0
            assert s.size <= cfg.max_nodes
            assert np.array_equal(s.adj, s.adj.T)
            assert np.all(np.diag(s.adj) == 0)
            assert s.node_map[0] == link.u and s.node_map[1] == link.v


def test_all_nodes_within_h_of_an_endpoint():
    rng = np.random.default_rng(22)
    for hops, ks in ((1, (3,)), (2, (3, 2))):
        n = 30
        edges = random_edge_list(n, 0.12, rng)
        g = build_graph(edges, np.zeros((n, 1), dtype=np.float32))
        dense = dense_from_edges(n, edges)
        u, v = 0, 1
        link = Link(u, v, POSITIVE if dense[u, v] else NEGATIVE)
        s = extract_slci(g, link, SamplerConfig(hops, ks))
        du = bfs_distances(dense, u)
        dv = bfs_distances(dense, v)
        for node in s.node_map:
            d = min(x for x in (du[node], dv[node]) if x is not None)
            assert d <= hops


def test_far_edges_do_not_change_sample():
    rng = np.random.default_rng(23)
    hops = 1
    n = 60
    edges = random_edge_list(n, 0.05, rng)
    g = build_graph(edges, np.arange(n, dtype=np.float32).reshape(n, 1))
    dense = dense_from_edges(n, edges)
    link = Link(0, 1, POSITIVE if dense[0, 1] else NEGATIVE)
    du, dv = bfs_distances(dense, 0), bfs_distances(dense, 1)

    def far(x):
        dx = [d for d in (du[x], dv[x]) if d is not None]
        return not dx or min(dx) > 2 * hops + 1

    far_nodes = [x for x in range(n) if far(x)]
    assert len(far_nodes) >= 2, "test graph too dense for a far pair"
    a, b = far_nodes[0], far_nodes[1]
    toggled = [e for e in edges if e != (min(a, b), max(a, b))]
    if len(toggled) == len(edges):
        toggled = edges + [(min(a, b), max(a, b))]
    g2 = build_graph(toggled, g.features)

    cfg = SamplerConfig(hops, (3,))
    s1 = extract_slci(g, link, cfg)
    s2 = extract_slci(g2, link, cfg)
    assert np.array_equal(s1.node_map, s2.node_map)
    assert np.array_equal(s1.adj, s2.adj)
    assert np.array_equal(s1.feats, s2.feats)


def test_extract_all_preserves_order_and_is_deterministic():
    rng = np.random.default_rng(24)
    g, _ = random_graph(50, 0.12, 3, rng)
    ds = split_links(sample_links(g, 0.9, seed=7), seed=7)
    cfg = SamplerConfig(1, (3,))
    out1 = extract_all(g, ds, cfg)
    out2 = extract_all(g, ds, cfg)
    assert len(out1) == len(ds)
    for s, link in zip(out1, ds.links):
        assert s.center == link
    for a, b in zip(out1, out2):
        assert np.array_equal(a.adj, b.adj)
        assert np.array_equal(a.feats, b.feats)
        assert np.array_equal(a.node_map, b.node_map)


def test_extract_all_workers_match_serial():
    rng = np.random.default_rng(25)
    g, _ = random_graph(40, 0.15, 2, rng)
    ds = split_links(sample_links(g, 1.0, seed=3), seed=3)
    serial = extract_all(g, ds, SamplerConfig(1, (3,)), workers=1)
    parallel = extract_all(g, ds, SamplerConfig(1, (3,)), workers=2)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.adj, b.adj)
        assert np.array_equal(a.node_map, b.node_map)

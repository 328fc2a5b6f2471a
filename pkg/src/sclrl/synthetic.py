"""Synthetic graph generators for demos, tests, and benchmarks."""

from __future__ import annotations

import numpy as np

from .graph import Graph, build_graph


def planted_partition(num_nodes: int = 400, num_blocks: int = 2,
                      p_in: float = 0.05, p_out: float = 0.005,
                      feat_dim: int = 10, noise: float = 0.1,
                      seed: int = 0) -> Graph:
    """Stochastic block model with block-indicator features plus noise.

    Node i belongs to block ``i * num_blocks // num_nodes``; its feature
    vector is the one-hot block indicator (in the first ``num_blocks``
    dimensions) with gaussian noise of scale ``noise`` added everywhere.
    """
    if feat_dim < num_blocks:
        raise ValueError("feat_dim must be at least num_blocks")
    rng = np.random.default_rng(seed)
    blocks = np.arange(num_nodes) * num_blocks // num_nodes
    edges = []
    for u in range(num_nodes):
        p_row = np.where(blocks[u + 1:] == blocks[u], p_in, p_out)
        hits = np.flatnonzero(rng.random(p_row.size) < p_row)
        edges.extend((u, u + 1 + int(v)) for v in hits)
    feats = rng.normal(scale=noise, size=(num_nodes, feat_dim))
    feats[np.arange(num_nodes), blocks] += 1.0
    return build_graph(edges, feats.astype(np.float32))


def erdos_renyi(num_nodes: int, p: float, feat_dim: int = 8,
                seed: int = 0) -> Graph:
    """Uniform random graph with gaussian features."""
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(num_nodes):
        hits = np.flatnonzero(rng.random(num_nodes - u - 1) < p)
        edges.extend((u, u + 1 + int(v)) for v in hits)
    feats = rng.normal(size=(num_nodes, feat_dim)).astype(np.float32)
    return build_graph(edges, feats)

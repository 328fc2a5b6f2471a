"""Shared test utilities: small random graphs, subgraph batches, and the
finite-difference gradient oracle."""

import numpy as np

from sclrl.augment import AugmentorSpec, IDENTICAL, make_views
from sclrl.contrast import batch_loss, contrastive_loss
from sclrl.encoder import EncoderDims, collect_gradients, encode_views, init_encoder
from sclrl.graph import build_graph
from sclrl.links import Link, NEGATIVE, POSITIVE
from sclrl.subgraph import SubgraphSample


def random_edge_list(n, p, rng):
    """Undirected edge list of an Erdos-Renyi draw, each pair once (u < v)."""
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v))
    return edges


def dense_from_edges(n, edges):
    """Dense 0/1 adjacency built directly from the edge list."""
    a = np.zeros((n, n), dtype=np.int64)
    for u, v in edges:
        a[u, v] = 1
        a[v, u] = 1
    return a


def random_graph(n, p, feat_dim, rng):
    """Random graph plus the independent dense-adjacency oracle."""
    edges = random_edge_list(n, p, rng)
    feats = rng.normal(size=(n, feat_dim)).astype(np.float32)
    return build_graph(edges, feats), dense_from_edges(n, edges)


def random_samples(count, rng, feat_dim=4, max_nodes=8):
    """Random standalone subgraph samples (symmetric adj, zero diagonal)."""
    out = []
    for _ in range(count):
        m = int(rng.integers(2, max_nodes + 1))
        adj = (rng.random((m, m)) < 0.4).astype(np.float32)
        adj = np.triu(adj, k=1)
        adj = adj + adj.T
        adj[0, 1] = adj[1, 0] = 0.0
        feats = rng.normal(size=(m, feat_dim)).astype(np.float32)
        label = POSITIVE if rng.random() < 0.5 else NEGATIVE
        out.append(SubgraphSample(center=Link(0, 1, label),
                                  node_map=np.arange(m), adj=adj,
                                  feats=feats, label=label))
    return out


def small_encoder(feat_dim=4, sim_dim=8, hidden=6, out=5, layers=2, seed=0,
                  dtype=np.float32, jitter_bias=False):
    dims = EncoderDims(feat_dim=feat_dim, sim_dim=sim_dim, hidden_dim=hidden,
                       out_dim=out, num_layers=layers)
    params = init_encoder(dims, seed=seed, dtype=dtype)
    if jitter_bias:
        # tiny hidden widths can otherwise produce all-dead relu rows and a
        # zero projection, where the cosine objective is undefined
        rng = np.random.default_rng(seed + 1)
        for name, t in params.named():
            if ".b" in name or name.startswith("proj.b"):
                t.data += rng.normal(scale=0.3, size=t.data.shape).astype(t.dtype)
    return params


def full_loss_value(params, views1, views2, tau=0.5, mode="paper"):
    """Scalar encoder-plus-loss objective for finite differencing."""
    _, z1 = encode_views(views1, params)
    _, z2 = encode_views(views2, params)
    return batch_loss(z1.data, z2.data, tau, mode)


def gradcheck_encoder(params64, views1, views2, tau=0.5, mode="paper",
                      step=1e-6, rel_tol=1e-3, abs_floor=1e-5):
    """Compare analytic parameter gradients against central finite differences.

    Runs in float64 (callers pass params built with dtype=np.float64).
    Returns the worst (error, allowance) pair seen, and asserts every
    element satisfies |analytic - fd| <= max(rel_tol * |fd|, abs_floor).
    """
    params64.zero_grad()
    _, z1 = encode_views(views1, params64)
    _, z2 = encode_views(views2, params64)
    loss = contrastive_loss(z1, z2, tau, mode)
    loss.backward()
    grads = collect_gradients(params64)

    worst = (0.0, abs_floor)
    for name, t in params64.named():
        data = t.data
        analytic = grads[name]
        for i in range(data.shape[0]):
            for j in range(data.shape[1]):
                saved = data[i, j]
                data[i, j] = saved + step
                up = full_loss_value(params64, views1, views2, tau, mode)
                data[i, j] = saved - step
                down = full_loss_value(params64, views1, views2, tau, mode)
                data[i, j] = saved
                fd = (up - down) / (2 * step)
                err = abs(analytic[i, j] - fd)
                allowance = max(rel_tol * abs(fd), abs_floor)
                if err / allowance > worst[0] / worst[1]:
                    worst = (err, allowance)
                assert err <= allowance, (
                    f"{name}[{i},{j}]: analytic {analytic[i, j]:.8g} vs fd {fd:.8g}")
    return worst


def paired_views(samples, kind1, kind2, seed, p=0.2, k=3):
    """Two view lists for a batch of samples under a fixed augmentor pair."""
    t1 = AugmentorSpec(kind1, p=p, k=k)
    t2 = AugmentorSpec(kind2, p=p, k=k)
    views1, views2 = [], []
    for i, s in enumerate(samples):
        v1, v2 = make_views(s, t1, t2, np.random.default_rng((seed, i)))
        views1.append(v1)
        views2.append(v2)
    return views1, views2

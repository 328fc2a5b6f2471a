"""Subgraph view generation: four augmentation operators plus identity.

Attribute operators perturb the feature matrix and leave the adjacency
untouched; structure operators do the opposite. Two operators applied to
the same subgraph yield the pair of correlated views consumed by the
contrastive objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .subgraph import SubgraphSample

IDENTICAL = "identical"
ATTR_MASK = "attr_mask"
EDGE_REMOVE = "edge_remove"
ATTR_SIMILARITY = "attr_similarity"
KNN_GRAPH = "knn_graph"

KINDS = (IDENTICAL, ATTR_MASK, EDGE_REMOVE, ATTR_SIMILARITY, KNN_GRAPH)
# operators whose output feature width is the node count instead of feat_dim
_SIM_KINDS = (ATTR_SIMILARITY,)
_P_KINDS = (ATTR_MASK, EDGE_REMOVE, ATTR_SIMILARITY)


@dataclass(frozen=True)
class AugmentorSpec:
    """One augmentation operator with its parameters.

    ``p`` applies to the masking/removal kinds, ``k`` to the knn kind;
    both are ignored elsewhere.
    """

    kind: str
    p: float = 0.0
    k: int = 3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown augmentor kind {self.kind!r}")
        if self.kind in _P_KINDS and not 0.0 <= self.p <= 1.0:
            raise ValueError("probability must be in [0, 1]")
        if self.kind == KNN_GRAPH and self.k < 1:
            raise ValueError("knn k must be >= 1")


@dataclass
class View:
    """One augmented copy of a subgraph, tagged with the operator that made it."""

    adj: np.ndarray
    feats: np.ndarray
    kind: str

    @property
    def size(self) -> int:
        return int(self.adj.shape[0])


def attr_mask(feats: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Zero a random subset of feature dimensions, the same for every node.

    One Bernoulli(1-p) keep-mask is drawn over the feature dimensions and
    applied row-wise.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability must be in [0, 1]")
    keep = (rng.random(feats.shape[1]) < 1.0 - p).astype(feats.dtype)
    return feats * keep


def edge_remove(adj: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Drop each undirected edge independently with probability p.

    The keep-mask is sampled on the upper triangle and mirrored, so the
    output stays symmetric and no new edge can appear.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability must be in [0, 1]")
    if not np.array_equal(adj, adj.T):
        raise ValueError("adjacency must be symmetric")
    m = adj.shape[0]
    keep = np.ones((m, m), dtype=adj.dtype)
    iu = np.triu_indices(m, k=1)
    draws = (rng.random(iu[0].size) < 1.0 - p).astype(adj.dtype)
    keep[iu] = draws
    keep[(iu[1], iu[0])] = draws
    return adj * keep


def similarity_matrix(feats: np.ndarray) -> np.ndarray:
    """Pairwise dot-product similarities, S[i, j] = x_i . x_j."""
    s = feats.astype(np.float64) @ feats.astype(np.float64).T
    return s.astype(np.float32)


def attr_similarity(feats: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Replace features by the masked node-similarity matrix (width = node count)."""
    return attr_mask(similarity_matrix(feats), p, rng)


def knn_rows(sim: np.ndarray, k: int) -> np.ndarray:
    """Per-row top-k selection of the similarity matrix, diagonal excluded.

    Each row of the result has exactly k ones; ties are resolved by
    ascending column index. This is the pre-symmetrization form.
    """
    m = sim.shape[0]
    if not 1 <= k < m:
        raise ValueError(f"k must satisfy 1 <= k < {m}")
    ranked = sim.astype(np.float64).copy()
    np.fill_diagonal(ranked, -np.inf)
    # stable sort on descending value keeps ascending column order for ties
    cols = np.argsort(-ranked, axis=1, kind="stable")[:, :k]
    out = np.zeros((m, m), dtype=np.float32)
    np.put_along_axis(out, cols, 1.0, axis=1)
    return out


def knn_graph(feats: np.ndarray, k: int) -> np.ndarray:
    """Adjacency from feature similarity: per-row top-k, OR-symmetrized."""
    rows = knn_rows(similarity_matrix(feats), k)
    out = np.maximum(rows, rows.T)
    np.fill_diagonal(out, 0.0)
    return out


def _apply(sample: SubgraphSample, spec: AugmentorSpec,
           rng: np.random.Generator) -> View:
    adj, feats = sample.adj, sample.feats
    if spec.kind == IDENTICAL:
        return View(adj.copy(), feats.copy(), spec.kind)
    if spec.kind == ATTR_MASK:
        return View(adj.copy(), attr_mask(feats, spec.p, rng), spec.kind)
    if spec.kind == EDGE_REMOVE:
        return View(edge_remove(adj, spec.p, rng), feats.copy(), spec.kind)
    if spec.kind == ATTR_SIMILARITY:
        return View(adj.copy(), attr_similarity(feats, spec.p, rng), spec.kind)
    if spec.kind == KNN_GRAPH:
        # subgraphs smaller than k+1 nodes fall back to all-other-nodes
        k = min(spec.k, sample.size - 1)
        if k < 1:
            return View(np.zeros_like(adj), feats.copy(), spec.kind)
        return View(knn_graph(feats, k), feats.copy(), spec.kind)
    raise ValueError(f"unknown augmentor kind {spec.kind!r}")


def make_views(sample: SubgraphSample, t1: AugmentorSpec, t2: AugmentorSpec,
               rng: np.random.Generator) -> tuple[View, View]:
    """Apply two operators to fresh copies of the subgraph.

    Each view consumes an independent child stream of ``rng``, so the two
    perturbations are uncorrelated and reproducible.
    """
    r1, r2 = rng.spawn(2)
    return _apply(sample, t1, r1), _apply(sample, t2, r2)

"""Immutable undirected graph with sorted-neighbor-list (CSR) adjacency.

Every other module builds on the three primitives here: neighbor
iteration, edge membership tests, and induced-subgraph extraction.
Graphs are simple (no self-loops, no parallel edges) and read-only
after construction, so they can be shared freely across workers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


class NodeSet:
    """Ordered collection of distinct node ids.

    The ordering is significant: induced subgraphs are indexed by the
    position of each id in this sequence.
    """

    __slots__ = ("members",)

    def __init__(self, members):
        arr = np.asarray(list(members), dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("node set must be one-dimensional")
        if arr.size != np.unique(arr).size:
            raise ValueError("node set contains duplicate ids")
        arr.setflags(write=False)
        self.members = arr

    def __len__(self):
        return int(self.members.size)

    def __iter__(self):
        return iter(self.members.tolist())

    def __getitem__(self, i):
        return int(self.members[i])

    def __eq__(self, other):
        if not isinstance(other, NodeSet):
            return NotImplemented
        return np.array_equal(self.members, other.members)

    def __repr__(self):
        return f"NodeSet({self.members.tolist()})"


@dataclass(frozen=True)
class Graph:
    """Undirected graph: CSR adjacency, dense float32 features, degree vector.

    Invariants (enforced by ``build_graph``):
      * adjacency is symmetric and has no self-loops,
      * each node's neighbor list is strictly ascending,
      * ``degrees[i] == len(neighbors(i))``.
    """

    num_nodes: int
    indptr: np.ndarray   # int64, length num_nodes + 1
    indices: np.ndarray  # int64, concatenated sorted neighbor lists
    features: np.ndarray  # float32, num_nodes x feat_dim
    degrees: np.ndarray  # int64, length num_nodes

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(self.indices.size // 2)

    @property
    def feat_dim(self) -> int:
        return int(self.features.shape[1])

    def _check_node(self, u: int) -> None:
        if not 0 <= u < self.num_nodes:
            raise ValueError(f"node id {u} out of range [0, {self.num_nodes})")

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of ``u`` (read-only view)."""
        self._check_node(u)
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        """True iff the undirected edge (u, v) exists. has_edge(u, u) is False."""
        self._check_node(u)
        self._check_node(v)
        if u == v:
            return False
        nbrs = self.neighbors(u)
        pos = np.searchsorted(nbrs, v)
        return bool(pos < nbrs.size and nbrs[pos] == v)

    def induced_subgraph(self, nodes) -> tuple[np.ndarray, np.ndarray]:
        """Dense adjacency and feature rows for the given ordered node set.

        Returns ``(adj, feats)`` where ``adj[p, q] == 1`` iff the graph has
        an edge between ``nodes[p]`` and ``nodes[q]``, and ``feats[p]`` is
        the feature row of ``nodes[p]``.
        """
        if not isinstance(nodes, NodeSet):
            nodes = NodeSet(nodes)
        ids = nodes.members
        if ids.size == 0:
            raise ValueError("empty node set")
        for u in ids:
            self._check_node(int(u))
        m = ids.size
        local = {int(u): p for p, u in enumerate(ids)}
        adj = np.zeros((m, m), dtype=np.float32)
        for p, u in enumerate(ids):
            for w in self.neighbors(int(u)):
                q = local.get(int(w))
                if q is not None:
                    adj[p, q] = 1.0
        feats = self.features[ids].astype(np.float32, copy=True)
        return adj, feats

    def edge_list(self) -> np.ndarray:
        """All edges as an (num_edges, 2) array with u < v per row."""
        us = np.repeat(np.arange(self.num_nodes, dtype=np.int64),
                       np.diff(self.indptr))
        keep = us < self.indices
        return np.stack([us[keep], self.indices[keep]], axis=1)


def build_graph(edges, features, num_nodes: int | None = None) -> Graph:
    """Build a canonical Graph from an edge list and a feature matrix.

    Self-loops and duplicate edges (in either orientation) are dropped;
    the drop counts are logged. Node count is taken from the feature
    matrix unless ``num_nodes`` is given, in which case the two must agree.
    """
    features = np.asarray(features, dtype=np.float32)
    if features.ndim != 2:
        raise ValueError("features must be a 2-d matrix")
    n = features.shape[0]
    if num_nodes is not None and num_nodes != n:
        raise ValueError(
            f"feature row count {n} does not match num_nodes {num_nodes}")

    n_self = 0
    n_in = 0
    pairs = set()
    for u, v in edges:
        n_in += 1
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) references node id out of range [0, {n})")
        if u == v:
            n_self += 1
            continue
        pairs.add((u, v) if u < v else (v, u))
    n_dup = n_in - n_self - len(pairs)
    if n_self or n_dup:
        logger.warning("dropped %d self-loop(s) and %d duplicate edge(s) at ingest",
                       n_self, n_dup)

    adj_lists: list[list[int]] = [[] for _ in range(n)]
    for u, v in pairs:
        adj_lists[u].append(v)
        adj_lists[v].append(u)

    degrees = np.array([len(a) for a in adj_lists], dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    for u, a in enumerate(adj_lists):
        a.sort()
        indices[indptr[u]:indptr[u + 1]] = a

    for arr in (indptr, indices, degrees):
        arr.setflags(write=False)
    features.setflags(write=False)
    return Graph(num_nodes=n, indptr=indptr, indices=indices,
                 features=features, degrees=degrees)

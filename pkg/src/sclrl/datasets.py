"""Graph file ingestion.

Two on-disk formats are understood:

  citation   a ``content`` file (``node_id  <feature values>  class_label``,
             whitespace separated) plus a ``cites`` file (``cited  citing``
             per line); string ids are mapped to dense integers in order of
             first appearance in the content file.

  generic    an edge list (``u v`` integer pairs per line) plus a CSV
             feature matrix whose row i belongs to node i.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import DataError
from .graph import Graph, build_graph

logger = logging.getLogger(__name__)


def ingest_citation(content_path, cites_path) -> Graph:
    """Load a citation-network dataset; see the module docstring for layout.

    Citations whose endpoints never appear in the content file are dropped
    with a warning; duplicate and reciprocal citations collapse into one
    undirected edge. Class labels are parsed (and their histogram logged)
    but not used.
    """
    ids: dict[str, int] = {}
    rows: list[np.ndarray] = []
    labels: list[str] = []
    feat_dim = None
    with open(content_path) as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise DataError(f"{content_path}:{lineno}: "
                                "expected 'id <features> label'")
            node_id, label = parts[0], parts[-1]
            if node_id in ids:
                raise DataError(f"{content_path}:{lineno}: duplicate node id {node_id!r}")
            try:
                feats = np.array([float(x) for x in parts[1:-1]], dtype=np.float32)
            except ValueError as exc:
                raise DataError(f"{content_path}:{lineno}: non-numeric feature "
                                f"({exc})") from None
            if feat_dim is None:
                feat_dim = feats.size
            elif feats.size != feat_dim:
                raise DataError(f"{content_path}:{lineno}: expected {feat_dim} "
                                f"features, found {feats.size}")
            ids[node_id] = len(rows)
            rows.append(feats)
            labels.append(label)
    if not rows:
        raise DataError(f"{content_path}: no nodes found")

    edges = []
    raw_lines = 0
    dropped = 0
    with open(cites_path) as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(f"{cites_path}:{lineno}: expected 'cited citing'")
            raw_lines += 1
            cited, citing = parts
            if cited not in ids or citing not in ids:
                dropped += 1
                continue
            edges.append((ids[cited], ids[citing]))
    if dropped:
        logger.warning("dropped %d citation(s) with endpoints missing from %s",
                       dropped, content_path)

    g = build_graph(edges, np.vstack(rows))
    hist = {}
    for lab in labels:
        hist[lab] = hist.get(lab, 0) + 1
    logger.info("citation ingest: %d nodes, %d features, %d raw citation lines, "
                "%d undirected edges after dedup, class histogram %s",
                g.num_nodes, g.feat_dim, raw_lines, g.num_edges, hist)
    return g


def ingest_generic(edges_path, features_path) -> Graph:
    """Load a graph from an integer edge list and a CSV feature matrix."""
    try:
        feats = np.loadtxt(features_path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise DataError(f"{features_path}: non-numeric feature ({exc})") from None
    n = feats.shape[0]
    edges = []
    with open(edges_path) as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(f"{edges_path}:{lineno}: expected 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(f"{edges_path}:{lineno}: non-integer node id") from None
            if not (0 <= u < n and 0 <= v < n):
                raise DataError(f"{edges_path}:{lineno}: node id outside the "
                                f"{n} feature rows (node count mismatch)")
            edges.append((u, v))
    return build_graph(edges, feats.astype(np.float32))


def export_generic(g: Graph, edges_path, features_path) -> None:
    """Write a graph in the generic format; inverse of :func:`ingest_generic`."""
    with open(edges_path, "w") as f:
        for u, v in g.edge_list():
            f.write(f"{u} {v}\n")
    np.savetxt(features_path, g.features, delimiter=",", fmt="%.8g")

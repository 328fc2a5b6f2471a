"""Labeled link sampling, 8:1:1 splitting, and test-edge masking.

Positive links are existing edges; negative links are uniformly drawn
non-edges, always in equal number. The observed graph handed to
heuristic baselines has the positive test-split edges removed so the
evaluation target never leaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, build_graph

POSITIVE = 1
NEGATIVE = 0

TRAIN, VAL, TEST = "train", "val", "test"
SPLITS = (TRAIN, VAL, TEST)


@dataclass(frozen=True)
class Link:
    """A labeled node pair, stored with u < v."""

    u: int
    v: int
    label: int

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError("link endpoints must differ")
        if self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label must be {POSITIVE} or {NEGATIVE}")
        if self.u > self.v:
            lo, hi = self.v, self.u
            object.__setattr__(self, "u", lo)
            object.__setattr__(self, "v", hi)

    @property
    def positive(self) -> bool:
        return self.label == POSITIVE


def _canon(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class LinkDataset:
    """Sampled links with their train/val/test assignment."""

    links: tuple[Link, ...]
    assignment: tuple[str, ...]
    seed: int

    def __post_init__(self):
        if len(self.links) != len(self.assignment):
            raise ValueError("links and assignment lengths differ")
        n_pos = sum(1 for l in self.links if l.positive)
        if 2 * n_pos != len(self.links):
            raise ValueError("positive and negative link counts must be equal")
        if len({(l.u, l.v) for l in self.links}) != len(self.links):
            raise ValueError("duplicate link pairs")
        for s in self.assignment:
            if s not in SPLITS:
                raise ValueError(f"unknown split tag {s!r}")

    def __len__(self):
        return len(self.links)

    def indices_for(self, split: str) -> list[int]:
        return [i for i, s in enumerate(self.assignment) if s == split]

    def links_for(self, split: str) -> list[Link]:
        return [self.links[i] for i in self.indices_for(split)]


def sample_links(g: Graph, fraction: float, seed: int) -> list[Link]:
    """Sample ceil(fraction * |E|) positive links and as many negatives.

    Positives are drawn uniformly without replacement from the edge set,
    negatives uniformly without replacement from the non-edges.
    Deterministic for a fixed seed.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    if g.num_edges == 0:
        raise ValueError("graph has no edges to sample")
    rng = np.random.default_rng(seed)

    edges = g.edge_list()
    n_pos = int(np.ceil(fraction * g.num_edges))
    chosen = rng.choice(g.num_edges, size=n_pos, replace=False)
    positives = [Link(int(u), int(v), POSITIVE) for u, v in edges[chosen]]

    total_pairs = g.num_nodes * (g.num_nodes - 1) // 2
    if total_pairs - g.num_edges < n_pos:
        raise ValueError("graph too dense to supply an equal number of negatives")

    taken: set[tuple[int, int]] = set()
    negatives: list[Link] = []
    while len(negatives) < n_pos:
        us = rng.integers(0, g.num_nodes, size=4 * (n_pos - len(negatives)) + 16)
        vs = rng.integers(0, g.num_nodes, size=us.size)
        for u, v in zip(us.tolist(), vs.tolist()):
            if u == v:
                continue
            pair = _canon(u, v)
            if pair in taken or g.has_edge(*pair):
                continue
            taken.add(pair)
            negatives.append(Link(pair[0], pair[1], NEGATIVE))
            if len(negatives) == n_pos:
                break
    return positives + negatives


def split_links(links: list[Link], seed: int) -> LinkDataset:
    """Stratified 8:1:1 split into train/val/test, deterministic per seed."""
    if not links:
        raise ValueError("empty link list")
    by_label = {POSITIVE: [], NEGATIVE: []}
    for i, l in enumerate(links):
        by_label[l.label].append(i)
    for idx in by_label.values():
        if len(idx) < 10:
            raise ValueError("fewer than 10 links per class; cannot split 8:1:1")

    rng = np.random.default_rng(seed)
    assignment = [TRAIN] * len(links)
    for idx in by_label.values():
        order = rng.permutation(len(idx))
        # round the two holdout shares so every split lands within one
        # link of the exact 8:1:1 proportions
        n_test = int(len(idx) / 10 + 0.5)
        n_hold = int(2 * len(idx) / 10 + 0.5)
        for j in order[:n_test]:
            assignment[idx[j]] = TEST
        for j in order[n_test:n_hold]:
            assignment[idx[j]] = VAL
    return LinkDataset(links=tuple(links), assignment=tuple(assignment), seed=seed)


def masked_graph(g: Graph, dataset: LinkDataset) -> Graph:
    """Copy of ``g`` with every positive test-split edge removed.

    Node set and features are unchanged; removing an absent edge is a no-op.
    """
    masked = {(l.u, l.v) for l in dataset.links_for(TEST) if l.positive}
    edges = [(int(u), int(v)) for u, v in g.edge_list()
             if (int(u), int(v)) not in masked]
    return build_graph(edges, g.features)


def write_link_file(path, dataset: LinkDataset, header: dict | None = None) -> None:
    """Write one link per line: ``u  v  label  split`` (tab-separated).

    Header key/value pairs are stored as ``# key = value`` comment lines.
    """
    with open(path, "w") as f:
        items = dict(header or {})
        items.setdefault("seed", dataset.seed)
        for k, v in items.items():
            f.write(f"# {k} = {v}\n")
        for link, split in zip(dataset.links, dataset.assignment):
            f.write(f"{link.u}\t{link.v}\t{link.label}\t{split}\n")


def read_link_file(path) -> LinkDataset:
    """Read a link file written by :func:`write_link_file`."""
    links: list[Link] = []
    assignment: list[str] = []
    seed = 0
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = (s.strip() for s in body.split("=", 1))
                    if k == "seed":
                        seed = int(v)
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 'u v label split'")
            u, v, label, split = parts
            links.append(Link(int(u), int(v), int(label)))
            assignment.append(split)
    return LinkDataset(links=tuple(links), assignment=tuple(assignment), seed=seed)

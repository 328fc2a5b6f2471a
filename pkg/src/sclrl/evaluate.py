"""Downstream link-prediction evaluation.

Four classic neighborhood heuristics scored on the masked observed graph,
rank-based AUC and average precision, a deterministic logistic-regression
probe over frozen embeddings, and repeated stratified cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

CN, SALTON, AA, RA = "cn", "salton", "aa", "ra"
HEURISTIC_KINDS = (CN, SALTON, AA, RA)


@dataclass(frozen=True)
class MetricReport:
    """Mean and standard deviation of AUC/AP over fold-by-repeat cells."""

    auc_mean: float
    auc_std: float
    ap_mean: float
    ap_std: float
    folds: int
    repeats: int


@dataclass(frozen=True)
class ProbeModel:
    """Logistic-regression probe: score(x) = sigmoid(x . weights + bias)."""

    weights: np.ndarray
    bias: float


def heuristic_score(g: Graph, kind: str, u: int, v: int) -> float:
    """Similarity score of a node pair under one neighborhood heuristic.

    cn      count of common neighbors
    salton  cn / sqrt(deg(u) * deg(v)), zero if either endpoint is isolated
    aa      sum over common neighbors z of 1 / log(deg(z)), skipping deg <= 1
    ra      sum over common neighbors z of 1 / deg(z)
    """
    if kind not in HEURISTIC_KINDS:
        raise ValueError(f"unknown heuristic kind {kind!r}")
    if u == v:
        raise ValueError("heuristic scores are defined for distinct endpoints")
    common = np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True)
    if kind == CN:
        return float(common.size)
    if kind == SALTON:
        du, dv = int(g.degrees[u]), int(g.degrees[v])
        if du == 0 or dv == 0:
            return 0.0
        return float(common.size / np.sqrt(du * dv))
    degs = g.degrees[common].astype(np.float64)
    if kind == AA:
        return float(sum(1.0 / np.log(d) for d in degs if d > 1))
    return float(sum(1.0 / d for d in degs))


def heuristic_scores(g: Graph, kind: str, pairs) -> np.ndarray:
    """Vector of heuristic scores for a sequence of (u, v) pairs."""
    return np.array([heuristic_score(g, kind, u, v) for u, v in pairs],
                    dtype=np.float64)


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their group."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative (ties 0.5).

    Computed from rank sums in O(n log n).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs both classes present")
    ranks = _average_ranks(scores)
    pos_rank_sum = ranks[labels == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """Mean of precision-at-rank over the positive items.

    Items are sorted by descending score, ties keeping input order.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if not np.any(labels == 1):
        raise ValueError("average precision needs at least one positive")
    order = np.argsort(-scores, kind="mergesort")
    hits = 0
    total = 0.0
    for rank, idx in enumerate(order, start=1):
        if labels[idx] == 1:
            hits += 1
            total += hits / rank
    return float(total / hits)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def train_probe(embeddings, labels, seed: int = 0, l2: float = 1e-4,
                max_iter: int = 500, grad_tol: float = 1e-6) -> ProbeModel:
    """Fit a logistic-regression probe by full-batch gradient descent.

    Features are standardized internally for conditioning and the descent
    is Nesterov-accelerated, so the iteration budget reaches a converged
    fit; the returned weights act on the raw feature space. Deterministic
    (zero initialization, fixed schedule).
    """
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ValueError("embeddings and labels disagree on sample count")
    if len(np.unique(y)) < 2:
        raise ValueError("probe needs both classes present")
    n, d = x.shape
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    xt = np.concatenate([(x - mu) / sd, np.ones((n, 1))], axis=1)
    penalty = np.ones(d + 1)
    penalty[-1] = 0.0  # bias not penalized
    lipschitz = np.linalg.norm(xt, 2) ** 2 / (4 * n) + 2 * l2
    step = 1.0 / lipschitz

    def gradient(v):
        p = _sigmoid(xt @ v)
        return xt.T @ (p - y) / n + 2 * l2 * penalty * v

    w = np.zeros(d + 1)
    w_prev = w.copy()
    momentum = 1.0
    for _ in range(max_iter):
        momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum ** 2))
        lookahead = w + ((momentum - 1.0) / momentum_next) * (w - w_prev)
        grad = gradient(lookahead)
        if np.linalg.norm(gradient(w)) < grad_tol:
            break
        w_prev = w
        w = lookahead - step * grad
        momentum = momentum_next
    raw_w = w[:-1] / sd
    raw_b = float(w[-1] - np.sum(w[:-1] * mu / sd))
    return ProbeModel(weights=raw_w, bias=raw_b)


def probe_scores(model: ProbeModel, embeddings) -> np.ndarray:
    """Predicted positive-class probabilities."""
    x = np.asarray(embeddings, dtype=np.float64)
    return _sigmoid(x @ model.weights + model.bias)


def stratified_folds(labels, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Disjoint, exhaustive test-index folds with per-class balance."""
    labels = np.asarray(labels)
    parts: list[list[int]] = [[] for _ in range(folds)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < folds:
            raise ValueError(f"class {cls} has fewer samples than folds")
        idx = idx[rng.permutation(idx.size)]
        for f, chunk in enumerate(np.array_split(idx, folds)):
            parts[f].extend(chunk.tolist())
    return [np.sort(np.array(p, dtype=np.int64)) for p in parts]


def cross_validate(embeddings, labels, folds: int = 10, repeats: int = 5,
                   seed: int = 0) -> MetricReport:
    """Repeated stratified k-fold evaluation of the probe.

    Each repeat reshuffles the fold assignment; the probe is fit on the
    remaining folds and scored on the held-out one. The report aggregates
    over every fold-repeat cell.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels)
    aucs, aps = [], []
    for rep in range(repeats):
        rng = np.random.default_rng((seed, rep))
        for test_idx in stratified_folds(y, folds, rng):
            mask = np.zeros(y.size, dtype=bool)
            mask[test_idx] = True
            model = train_probe(x[~mask], y[~mask], seed=seed)
            scores = probe_scores(model, x[mask])
            aucs.append(auc(scores, y[mask]))
            aps.append(average_precision(scores, y[mask]))
    return MetricReport(auc_mean=float(np.mean(aucs)), auc_std=float(np.std(aucs)),
                        ap_mean=float(np.mean(aps)), ap_std=float(np.std(aps)),
                        folds=folds, repeats=repeats)


def score_report(scores, labels, folds: int = 10, repeats: int = 5,
                 seed: int = 0) -> MetricReport:
    """Fold-level AUC/AP statistics for precomputed scores (no probe).

    Used for the heuristic baselines, which need no training: the scored
    links are folded the same way the probe evaluation folds its inputs.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    aucs, aps = [], []
    for rep in range(repeats):
        rng = np.random.default_rng((seed, rep))
        for test_idx in stratified_folds(y, folds, rng):
            aucs.append(auc(s[test_idx], y[test_idx]))
            aps.append(average_precision(s[test_idx], y[test_idx]))
    return MetricReport(auc_mean=float(np.mean(aucs)), auc_std=float(np.std(aucs)),
                        ap_mean=float(np.mean(aps)), ap_std=float(np.std(aps)),
                        folds=folds, repeats=repeats)

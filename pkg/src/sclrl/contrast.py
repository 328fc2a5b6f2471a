"""Subgraph-level contrastive objective and the mini-batch training loop.

The loss treats the first view of each subgraph as the anchor: its
similarity to the second view of the same subgraph is pushed up against
its similarities to the second views of every other subgraph in the
batch. In ``paper`` mode the positive pair is excluded from the
denominator; ``ntxent`` mode keeps it, matching the common NT-Xent form.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .augment import (ATTR_SIMILARITY, IDENTICAL, KINDS, AugmentorSpec, View,
                      make_views)
from .encoder import EncoderParams, encode_views
from .errors import DivergenceError
from .subgraph import SubgraphSample
from .tensor import Tensor2

LOSS_MODES = ("paper", "ntxent")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 128
    temperature: float = 0.5
    epochs: int = 50
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    aug1: AugmentorSpec = AugmentorSpec(IDENTICAL)
    aug2: AugmentorSpec = AugmentorSpec(ATTR_SIMILARITY, p=0.2)
    aug_p: float = 0.2
    knn_k: int = 3
    seed: int = 0
    loss_mode: str = "paper"
    refresh_views: bool = True
    resample_augmentors: bool = False

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.loss_mode not in LOSS_MODES:
            raise ValueError(f"loss_mode must be one of {LOSS_MODES}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")


@dataclass
class TrainReport:
    """Per-epoch mean loss and wall-clock time, plus a peak memory estimate."""

    epoch_losses: list[float] = field(default_factory=list)
    epoch_seconds: list[float] = field(default_factory=list)
    peak_memory_bytes: int = 0


def cosine_sim(z1: np.ndarray, z2: np.ndarray) -> float:
    """Cosine similarity of two non-zero vectors."""
    a = np.asarray(z1, dtype=np.float64).reshape(-1)
    b = np.asarray(z2, dtype=np.float64).reshape(-1)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("zero-norm vector has no cosine similarity")
    return float(a @ b / (na * nb))


def _loss_forward(z1: np.ndarray, z2: np.ndarray, tau: float, mode: str):
    """Float64 loss value plus everything the backward pass needs."""
    if mode not in LOSS_MODES:
        raise ValueError(f"loss mode must be one of {LOSS_MODES}")
    a = np.asarray(z1, dtype=np.float64)
    b = np.asarray(z2, dtype=np.float64)
    n = a.shape[0]
    if n < 2:
        raise ValueError("batch loss needs at least two subgraphs")
    if b.shape != a.shape:
        raise ValueError("view embedding shapes differ")
    ra = np.linalg.norm(a, axis=1, keepdims=True)
    rb = np.linalg.norm(b, axis=1, keepdims=True)
    if np.any(ra == 0) or np.any(rb == 0):
        raise ValueError("zero-norm embedding row (degenerate encoder output)")
    ah, bh = a / ra, b / rb
    logits = (ah @ bh.T) / tau
    if mode == "paper":
        valid = ~np.eye(n, dtype=bool)
    else:
        valid = np.ones((n, n), dtype=bool)
    masked = np.where(valid, logits, -np.inf)
    rowmax = masked.max(axis=1, keepdims=True)
    expo = np.exp(masked - rowmax)
    denom = expo.sum(axis=1, keepdims=True)
    per_item = (np.log(denom) + rowmax).ravel() - np.diag(logits)
    loss = float(per_item.mean())
    cache = (ah, bh, ra, rb, expo / denom, tau, n)
    return loss, cache


def _loss_backward(cache):
    ah, bh, ra, rb, softmax, tau, n = cache
    dlogits = (softmax - np.eye(n)) / n
    ds = dlogits / tau
    dah = ds @ bh
    dbh = ds.T @ ah

    def through_norm(dhat, hat, r):
        return (dhat - (dhat * hat).sum(axis=1, keepdims=True) * hat) / r

    return through_norm(dah, ah, ra), through_norm(dbh, bh, rb)


def batch_loss(z1: np.ndarray, z2: np.ndarray, tau: float,
               mode: str = "paper") -> float:
    """Contrastive loss over a batch of paired view embeddings."""
    loss, _ = _loss_forward(z1, z2, tau, mode)
    return loss


def contrastive_loss(z1: Tensor2, z2: Tensor2, tau: float,
                     mode: str = "paper") -> Tensor2:
    """Tape node for the batch loss, differentiable w.r.t. both inputs."""
    loss, cache = _loss_forward(z1.data, z2.data, tau, mode)
    out = np.array([[loss]])
    if not (z1.requires_grad or z2.requires_grad):
        return T.constant(out, dtype=z1.dtype)

    def vjp(g):
        scale = float(g[0, 0])
        g1, g2 = _loss_backward(cache)
        return ((scale * g1).astype(z1.dtype, copy=False),
                (scale * g2).astype(z2.dtype, copy=False))

    return Tensor2(out.astype(z1.dtype), requires_grad=True,
                   parents=(z1, z2), vjp=vjp)


class SgdOptimizer:
    def __init__(self, params: EncoderParams, lr: float):
        self.named = params.named()
        self.lr = lr

    def step(self):
        for _, t in self.named:
            if t.grad is not None:
                t.data -= (self.lr * t.grad).astype(t.dtype, copy=False)


class AdamOptimizer:
    def __init__(self, params: EncoderParams, lr: float,
                 beta1=0.9, beta2=0.999, eps=1e-8):
        self.named = params.named()
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {name: np.zeros_like(t.data) for name, t in self.named}
        self.v = {name: np.zeros_like(t.data) for name, t in self.named}

    def step(self):
        self.t += 1
        bc1 = 1.0 - self.b1 ** self.t
        bc2 = 1.0 - self.b2 ** self.t
        for name, t in self.named:
            if t.grad is None:
                continue
            g = t.grad
            m = self.m[name]
            v = self.v[name]
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            update = self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            t.data -= update.astype(t.dtype, copy=False)


def make_optimizer(params: EncoderParams, cfg: TrainConfig):
    if cfg.optimizer == "sgd":
        return SgdOptimizer(params, cfg.learning_rate)
    return AdamOptimizer(params, cfg.learning_rate, cfg.adam_beta1,
                         cfg.adam_beta2, cfg.adam_eps)


def _batch_specs(cfg: TrainConfig, epoch: int, batch: int):
    if not cfg.resample_augmentors:
        return cfg.aug1, cfg.aug2
    rng = np.random.default_rng((cfg.seed, 202, epoch, batch))
    kinds = rng.choice(len(KINDS), size=2)
    return tuple(AugmentorSpec(KINDS[int(k)], p=cfg.aug_p, k=cfg.knn_k)
                 for k in kinds)


def _views_for_batch(samples, indices, t1, t2, cfg: TrainConfig, epoch: int):
    epoch_tag = epoch if cfg.refresh_views else 0
    views1, views2 = [], []
    for idx in indices:
        rng = np.random.default_rng((cfg.seed, 303, epoch_tag, int(idx)))
        v1, v2 = make_views(samples[idx], t1, t2, rng)
        views1.append(v1)
        views2.append(v2)
    return views1, views2


def train(samples: list[SubgraphSample], params: EncoderParams,
          cfg: TrainConfig) -> tuple[EncoderParams, TrainReport]:
    """Contrastive pre-training over subgraph mini-batches.

    Each epoch reshuffles the samples, cuts them into full batches
    (a short trailing batch is dropped), regenerates the two augmented
    views per subgraph, and applies one optimizer step per batch.
    Deterministic for a fixed seed in single-worker execution.
    """
    n = cfg.batch_size
    if len(samples) < n:
        raise ValueError(f"need at least batch_size={n} training samples")
    opt = make_optimizer(params, cfg)
    report = TrainReport()
    param_bytes = params.num_bytes()
    peak_act = 0
    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        order = np.random.default_rng((cfg.seed, 101, epoch)).permutation(len(samples))
        losses = []
        for batch_idx in range(len(samples) // n):
            indices = order[batch_idx * n:(batch_idx + 1) * n]
            t1, t2 = _batch_specs(cfg, epoch, batch_idx)
            views1, views2 = _views_for_batch(samples, indices, t1, t2, cfg, epoch)
            _, z1 = encode_views(views1, params)
            _, z2 = encode_views(views2, params)
            loss = contrastive_loss(z1, z2, cfg.temperature, cfg.loss_mode)
            value = loss.item()
            if not np.isfinite(value):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch {batch_idx}")
            peak_act = max(peak_act, T.graph_bytes(loss))
            params.zero_grad()
            loss.backward()
            opt.step()
            losses.append(value)
        report.epoch_losses.append(float(np.mean(losses)))
        report.epoch_seconds.append(time.perf_counter() - started)
    report.peak_memory_bytes = param_bytes + peak_act
    return params, report


def embed_links(samples: list[SubgraphSample], params: EncoderParams,
                batch_size: int = 256, source: str = "z") -> np.ndarray:
    """Embed every subgraph with the unperturbed (identity) view.

    Row i is the representation of ``samples[i]``; ``source`` selects the
    projected embedding ``z`` (default) or the pooled encoder output ``h``.
    """
    if source not in ("z", "h"):
        raise ValueError("source must be 'z' or 'h'")
    rows = []
    for lo in range(0, len(samples), batch_size):
        chunk = samples[lo:lo + batch_size]
        views = [View(s.adj, s.feats, IDENTICAL) for s in chunk]
        h, z = encode_views(views, params)
        rows.append((z if source == "z" else h).data.copy())
    if not rows:
        return np.zeros((0, params.dims.out_dim), dtype=np.float32)
    out = np.concatenate(rows, axis=0)
    if not np.all(np.isfinite(out)):
        raise DivergenceError("non-finite link embedding")
    return out

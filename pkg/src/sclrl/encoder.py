"""Subgraph encoder: input adapters, GIN message passing, sum-pool readout,
and a projection head.

Each augmentor kind owns a linear input adapter so that raw-feature views
(width = feature dimension) and similarity views (width = sampler node
bound, zero-padded) share one trunk. A GIN layer computes
``MLP((1 + eps) * H + A @ H)`` with a two-linear MLP and ReLU between;
the readout concatenates the per-layer column sums, which makes the final
embedding invariant to node order.

Several views are encoded at once by stacking their node features into
block rows and their adjacencies into one block-diagonal matrix; messages
cannot cross the zero blocks, so the batched pass equals the per-view one.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .augment import ATTR_SIMILARITY, IDENTICAL, KINDS, View
from .errors import DivergenceError
from .tensor import Tensor2

MAGIC = b"SCLRL1"


@dataclass(frozen=True)
class EncoderDims:
    """Widths of the encoder stages."""

    feat_dim: int
    sim_dim: int
    hidden_dim: int = 128
    out_dim: int = 128
    num_layers: int = 2

    def adapter_width(self, kind: str) -> int:
        return self.sim_dim if kind == ATTR_SIMILARITY else self.feat_dim


@dataclass
class GinLayer:
    eps: Tensor2
    w1: Tensor2
    b1: Tensor2
    w2: Tensor2
    b2: Tensor2


@dataclass
class ProjectionHead:
    w1: Tensor2
    b1: Tensor2
    w2: Tensor2
    b2: Tensor2


@dataclass
class EncoderParams:
    """All trainable tensors, with a canonical naming for checkpoints."""

    dims: EncoderDims
    adapters: dict[str, Tensor2]
    gin_layers: list[GinLayer]
    proj: ProjectionHead

    def named(self) -> list[tuple[str, Tensor2]]:
        out = [(f"adapter.{kind}", self.adapters[kind]) for kind in KINDS]
        for i, layer in enumerate(self.gin_layers):
            out += [(f"gin.{i}.eps", layer.eps), (f"gin.{i}.w1", layer.w1),
                    (f"gin.{i}.b1", layer.b1), (f"gin.{i}.w2", layer.w2),
                    (f"gin.{i}.b2", layer.b2)]
        out += [("proj.w1", self.proj.w1), ("proj.b1", self.proj.b1),
                ("proj.w2", self.proj.w2), ("proj.b2", self.proj.b2)]
        return out

    def zero_grad(self) -> None:
        for _, t in self.named():
            t.grad = None

    def num_bytes(self) -> int:
        return sum(t.data.nbytes for _, t in self.named())

    def cast(self, dtype) -> "EncoderParams":
        """Copy with every tensor converted to ``dtype`` (for test harnesses)."""
        def cv(t):
            return T.parameter(t.data.astype(dtype))
        adapters = {k: cv(v) for k, v in self.adapters.items()}
        layers = [GinLayer(*(cv(x) for x in (l.eps, l.w1, l.b1, l.w2, l.b2)))
                  for l in self.gin_layers]
        proj = ProjectionHead(*(cv(x) for x in
                                (self.proj.w1, self.proj.b1, self.proj.w2, self.proj.b2)))
        return EncoderParams(self.dims, adapters, layers, proj)


def _glorot(rng, fan_in, fan_out, dtype):
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return T.parameter(rng.uniform(-a, a, size=(fan_in, fan_out)), dtype=dtype)


def _zeros(rows, cols, dtype):
    return T.parameter(np.zeros((rows, cols)), dtype=dtype)


def init_encoder(dims: EncoderDims, seed: int, dtype=np.float32) -> EncoderParams:
    """Glorot-uniform weights, zero biases, zero (learnable) eps."""
    rng = np.random.default_rng(seed)
    d = dims.hidden_dim
    adapters = {kind: _glorot(rng, dims.adapter_width(kind), d, dtype)
                for kind in KINDS}
    layers = [GinLayer(eps=_zeros(1, 1, dtype),
                       w1=_glorot(rng, d, d, dtype), b1=_zeros(1, d, dtype),
                       w2=_glorot(rng, d, d, dtype), b2=_zeros(1, d, dtype))
              for _ in range(dims.num_layers)]
    pooled = dims.num_layers * d
    proj = ProjectionHead(w1=_glorot(rng, pooled, d, dtype), b1=_zeros(1, d, dtype),
                          w2=_glorot(rng, d, dims.out_dim, dtype),
                          b2=_zeros(1, dims.out_dim, dtype))
    return EncoderParams(dims, adapters, layers, proj)


def _adapter_input(view: View, dims: EncoderDims) -> np.ndarray:
    """Feature block for one view, zero-padding similarity views to sim_dim."""
    feats = view.feats
    width = dims.adapter_width(view.kind)
    if view.kind == ATTR_SIMILARITY:
        if feats.shape[1] > width:
            raise ValueError(
                f"similarity view has {feats.shape[1]} columns, adapter takes {width}")
        if feats.shape[1] < width:
            pad = np.zeros((feats.shape[0], width - feats.shape[1]), dtype=feats.dtype)
            feats = np.concatenate([feats, pad], axis=1)
        return feats
    if feats.shape[1] != width:
        raise ValueError(
            f"view of kind {view.kind!r} has {feats.shape[1]} feature columns, "
            f"adapter takes {width}")
    return feats


def _gin_apply(a_blk: Tensor2, h: Tensor2, layer: GinLayer) -> Tensor2:
    gathered = T.matmul(a_blk, h)
    combined = T.add(T.mul(h, T.add_scalar(layer.eps, 1.0)), gathered)
    hidden = T.relu(T.add(T.matmul(combined, layer.w1), layer.b1))
    return T.add(T.matmul(hidden, layer.w2), layer.b2)


def encode_views(views: list[View], params: EncoderParams) -> tuple[Tensor2, Tensor2]:
    """Encode a batch of same-kind views into pooled and projected tensors.

    Returns ``(h, z)`` with one row per view: ``h`` is the concatenated
    per-layer sum-pooled representation, ``z`` its projection.
    """
    if not views:
        raise ValueError("no views to encode")
    kind = views[0].kind
    if kind not in KINDS:
        raise ValueError(f"unknown augmentor kind {kind!r}")
    if any(v.kind != kind for v in views):
        raise ValueError("all views in a batch must share one augmentor kind")
    dims = params.dims
    dtype = params.proj.w1.dtype

    sizes = [v.size for v in views]
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    total = int(starts[-1])
    x_blk = np.concatenate([_adapter_input(v, dims) for v in views], axis=0)
    a_blk = np.zeros((total, total), dtype=dtype)
    for v, s in zip(views, starts[:-1]):
        a_blk[s:s + v.size, s:s + v.size] = v.adj

    x = T.constant(x_blk, dtype=dtype)
    a = T.constant(a_blk, dtype=dtype)
    h = T.matmul(x, params.adapters[kind])
    pooled = []
    for layer in params.gin_layers:
        h = _gin_apply(a, h, layer)
        pooled.append(T.segment_sum(h, starts))
    h_out = T.concat_cols(pooled)
    hidden = T.relu(T.add(T.matmul(h_out, params.proj.w1), params.proj.b1))
    z = T.add(T.matmul(hidden, params.proj.w2), params.proj.b2)
    return h_out, z


def encode(view: View, params: EncoderParams) -> tuple[np.ndarray, np.ndarray]:
    """Encode a single view; returns the pooled vector h and projection z."""
    h, z = encode_views([view], params)
    h_vec, z_vec = h.data[0].copy(), z.data[0].copy()
    if not (np.all(np.isfinite(h_vec)) and np.all(np.isfinite(z_vec))):
        raise DivergenceError("non-finite encoder output")
    return h_vec, z_vec


def gin_layer_forward(adj: np.ndarray, h: np.ndarray, layer: GinLayer) -> np.ndarray:
    """One GIN layer on plain arrays: MLP((1 + eps) * h + adj @ h)."""
    if adj.shape[0] != adj.shape[1] or adj.shape[0] != h.shape[0]:
        raise ValueError("adjacency and feature row counts do not match")
    dtype = layer.w1.dtype
    out = _gin_apply(T.constant(adj, dtype=dtype), T.constant(h, dtype=dtype), layer)
    return out.data


def readout(h_per_layer: list[np.ndarray]) -> np.ndarray:
    """Concatenate per-layer column sums into one order-invariant vector."""
    if not h_per_layer:
        raise ValueError("empty layer list")
    m = h_per_layer[0].shape[0]
    if any(h.shape[0] != m for h in h_per_layer):
        raise ValueError("layers disagree on node count")
    parts = [h.sum(axis=0, dtype=np.float64) for h in h_per_layer]
    return np.concatenate(parts).astype(h_per_layer[0].dtype, copy=False)


def collect_gradients(params: EncoderParams) -> dict[str, np.ndarray]:
    """Gradient mirror of the parameters; zeros where nothing flowed."""
    out = {}
    for name, t in params.named():
        out[name] = np.zeros_like(t.data) if t.grad is None else t.grad.copy()
    return out


def save_checkpoint(params: EncoderParams, path) -> None:
    """Binary checkpoint: magic, then per tensor name/rows/cols/float32 data."""
    with open(path, "wb") as f:
        f.write(MAGIC)
        for name, t in params.named():
            blob = name.encode("utf-8")
            f.write(struct.pack("<Q", len(blob)))
            f.write(blob)
            f.write(struct.pack("<QQ", t.rows, t.cols))
            f.write(np.ascontiguousarray(t.data, dtype="<f4").tobytes())


def load_checkpoint(path) -> EncoderParams:
    """Rebuild encoder parameters from a checkpoint file."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    off = len(MAGIC)
    tensors: dict[str, np.ndarray] = {}
    while off < len(raw):
        (nlen,) = struct.unpack_from("<Q", raw, off)
        off += 8
        name = raw[off:off + nlen].decode("utf-8")
        off += nlen
        rows, cols = struct.unpack_from("<QQ", raw, off)
        off += 16
        count = rows * cols
        data = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
        off += 4 * count
        tensors[name] = data.reshape(rows, cols).astype(np.float32)

    def take(name):
        if name not in tensors:
            raise ValueError(f"{path}: missing tensor {name!r}")
        return T.parameter(tensors.pop(name))

    adapters = {kind: take(f"adapter.{kind}") for kind in KINDS}
    layers = []
    i = 0
    while f"gin.{i}.eps" in tensors:
        layers.append(GinLayer(eps=take(f"gin.{i}.eps"),
                               w1=take(f"gin.{i}.w1"), b1=take(f"gin.{i}.b1"),
                               w2=take(f"gin.{i}.w2"), b2=take(f"gin.{i}.b2")))
        i += 1
    if not layers:
        raise ValueError(f"{path}: no message-passing layers found")
    proj = ProjectionHead(w1=take("proj.w1"), b1=take("proj.b1"),
                          w2=take("proj.w2"), b2=take("proj.b2"))
    if tensors:
        raise ValueError(f"{path}: unexpected tensors {sorted(tensors)}")
    dims = EncoderDims(feat_dim=adapters[IDENTICAL].rows,
                       sim_dim=adapters[ATTR_SIMILARITY].rows,
                       hidden_dim=adapters[IDENTICAL].cols,
                       out_dim=proj.w2.cols,
                       num_layers=len(layers))
    return EncoderParams(dims, adapters, layers, proj)

"""Minimal dense 2-d tensor with reverse-mode gradients.

Just enough machinery for the encoder and the contrastive loss: matmul,
broadcast add/mul, relu, segment-sum pooling, and column concatenation.
Values are stored in float32 by default while every reduction (matrix
products, sums) accumulates in float64 before rounding back, which keeps
sum-pooling stable under row permutations. Passing float64 data switches
the whole graph to float64; the finite-difference test harness relies on
that.
"""

from __future__ import annotations

import numpy as np


class Tensor2:
    """2-d array node in a reverse-mode computation graph."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False, parents=(), vjp=None):
        arr = np.asarray(data)
        if arr.ndim != 2:
            raise ValueError("Tensor2 holds 2-d data only")
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.requires_grad = requires_grad
        self.grad = None
        self._parents = tuple(parents)
        self._vjp = vjp

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def cols(self) -> int:
        return int(self.data.shape[1])

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        return f"Tensor2(shape={self.data.shape}, grad={self.requires_grad})"

    def backward(self) -> None:
        """Accumulate gradients of this scalar into every upstream tensor."""
        if self.data.shape != (1, 1):
            raise ValueError("backward target must be a 1x1 scalar")
        order: list[Tensor2] = []
        visited: set[int] = set()
        stack: list[Tensor2] = [self]
        while stack:
            node = stack[-1]
            if id(node) in visited:
                stack.pop()
                continue
            pending = [p for p in node._parents
                       if p.requires_grad and id(p) not in visited]
            if pending:
                stack.extend(pending)
            else:
                visited.add(id(node))
                order.append(node)
                stack.pop()
        self.grad = np.ones((1, 1), dtype=self.data.dtype)
        for node in reversed(order):
            if node._vjp is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._vjp(node.grad)):
                if g is None or not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = np.zeros_like(parent.data)
                parent.grad += g


def constant(data, dtype=np.float32) -> Tensor2:
    """Wrap fixed input data (no gradient)."""
    return Tensor2(np.asarray(data, dtype=dtype))


def parameter(data, dtype=np.float32) -> Tensor2:
    """Wrap trainable data (gradient accumulated on backward)."""
    return Tensor2(np.asarray(data, dtype=dtype), requires_grad=True)


def _f64(x: np.ndarray) -> np.ndarray:
    return x.astype(np.float64, copy=False)


def _check_pair(a: Tensor2, b: Tensor2) -> None:
    if a.dtype != b.dtype:
        raise ValueError(f"mixed dtypes {a.dtype} and {b.dtype}")


def _needs_grad(*ts: Tensor2) -> bool:
    return any(t.requires_grad for t in ts)


def _unbroadcast(g: np.ndarray, shape: tuple[int, int], dtype) -> np.ndarray:
    out = _f64(g)
    if shape[0] == 1 and out.shape[0] > 1:
        out = out.sum(axis=0, keepdims=True)
    if shape[1] == 1 and out.shape[1] > 1:
        out = out.sum(axis=1, keepdims=True)
    return out.astype(dtype, copy=False)


def matmul(a: Tensor2, b: Tensor2) -> Tensor2:
    """Matrix product with float64 accumulation."""
    _check_pair(a, b)
    dtype = a.dtype
    out = (_f64(a.data) @ _f64(b.data)).astype(dtype, copy=False)
    if not _needs_grad(a, b):
        return Tensor2(out)

    def vjp(g):
        g64 = _f64(g)
        ga = (g64 @ _f64(b.data).T).astype(dtype, copy=False) if a.requires_grad else None
        gb = (_f64(a.data).T @ g64).astype(dtype, copy=False) if b.requires_grad else None
        return ga, gb

    return Tensor2(out, requires_grad=True, parents=(a, b), vjp=vjp)


def add(a: Tensor2, b: Tensor2) -> Tensor2:
    """Elementwise sum with numpy broadcasting (e.g. bias rows)."""
    _check_pair(a, b)
    out = a.data + b.data
    if not _needs_grad(a, b):
        return Tensor2(out)

    def vjp(g):
        ga = _unbroadcast(g, a.data.shape, a.dtype) if a.requires_grad else None
        gb = _unbroadcast(g, b.data.shape, b.dtype) if b.requires_grad else None
        return ga, gb

    return Tensor2(out, requires_grad=True, parents=(a, b), vjp=vjp)


def mul(a: Tensor2, b: Tensor2) -> Tensor2:
    """Elementwise product with numpy broadcasting (e.g. scalar gates)."""
    _check_pair(a, b)
    out = a.data * b.data
    if not _needs_grad(a, b):
        return Tensor2(out)

    def vjp(g):
        ga = _unbroadcast(g * b.data, a.data.shape, a.dtype) if a.requires_grad else None
        gb = _unbroadcast(g * a.data, b.data.shape, b.dtype) if b.requires_grad else None
        return ga, gb

    return Tensor2(out, requires_grad=True, parents=(a, b), vjp=vjp)


def add_scalar(a: Tensor2, c: float) -> Tensor2:
    """Add a python scalar."""
    out = a.data + a.dtype.type(c)
    if not a.requires_grad:
        return Tensor2(out)
    return Tensor2(out, requires_grad=True, parents=(a,),
                   vjp=lambda g: (g,))


def relu(a: Tensor2) -> Tensor2:
    out = np.maximum(a.data, 0)
    if not a.requires_grad:
        return Tensor2(out)
    mask = (a.data > 0).astype(a.dtype)
    return Tensor2(out, requires_grad=True, parents=(a,),
                   vjp=lambda g: (g * mask,))


def segment_sum(a: Tensor2, starts: np.ndarray) -> Tensor2:
    """Sum contiguous row blocks: out[i] = a[starts[i]:starts[i+1]].sum(axis=0).

    ``starts`` has one more entry than there are segments; every segment
    must be non-empty. Accumulates in float64.
    """
    starts = np.asarray(starts, dtype=np.int64)
    lengths = np.diff(starts)
    if starts[0] != 0 or starts[-1] != a.rows or np.any(lengths < 1):
        raise ValueError("segment starts must cover all rows with non-empty segments")
    out = np.add.reduceat(_f64(a.data), starts[:-1], axis=0).astype(a.dtype, copy=False)
    if not a.requires_grad:
        return Tensor2(out)

    def vjp(g):
        return (np.repeat(g, lengths, axis=0),)

    return Tensor2(out, requires_grad=True, parents=(a,), vjp=vjp)


def concat_cols(tensors: list[Tensor2]) -> Tensor2:
    """Concatenate along columns."""
    if not tensors:
        raise ValueError("nothing to concatenate")
    out = np.concatenate([t.data for t in tensors], axis=1)
    if not _needs_grad(*tensors):
        return Tensor2(out)
    offsets = np.cumsum([0] + [t.cols for t in tensors])

    def vjp(g):
        return tuple(g[:, offsets[i]:offsets[i + 1]] if t.requires_grad else None
                     for i, t in enumerate(tensors))

    return Tensor2(out, requires_grad=True, parents=tuple(tensors), vjp=vjp)


def graph_bytes(root: Tensor2) -> int:
    """Total bytes held by intermediate tensors reachable from ``root``.

    Leaves (parameters and wrapped inputs) are excluded; this is the
    transient-activation component of the memory estimate.
    """
    seen: set[int] = set()
    stack = [root]
    total = 0
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node._parents:
            total += node.data.nbytes
        stack.extend(node._parents)
    return total

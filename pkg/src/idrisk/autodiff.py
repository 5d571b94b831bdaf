"""Minimal reverse-mode automatic differentiation over dense float64 arrays.

Tensors are rank <= 2 numpy arrays. Each op records its parents and a
backward closure; `Tensor.backward()` walks the graph in reverse topological
order accumulating gradients into every tensor with requires_grad set.
Only the ops the link-prediction models need are provided.
"""

from __future__ import annotations

import numpy as np

_CLIP_LO = 1e-7
_CLIP_HI = 1.0 - 1e-7


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > 2:
            raise ValueError(f"rank {arr.ndim} tensors are not supported")
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Backpropagate from a scalar (size-1) tensor."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _result(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError("matmul requires rank-2 tensors")
    if a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul shape mismatch {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return _result(data, (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise add; also supports broadcasting a (d,) bias over (n, d) rows."""
    broadcast = a.data.shape != b.data.shape
    if broadcast and not (
        a.data.ndim == 2 and b.data.ndim == 1 and a.data.shape[1] == b.data.shape[0]
    ):
        raise ValueError(f"add shape mismatch {a.shape} + {b.shape}")
    data = a.data + b.data

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g)
        if b.requires_grad:
            b._accumulate(g.sum(axis=0) if broadcast else g)

    return _result(data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Hadamard (elementwise) product of same-shape tensors."""
    if a.data.shape != b.data.shape:
        raise ValueError(f"hadamard shape mismatch {a.shape} * {b.shape}")
    data = a.data * b.data

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g * b.data)
        if b.requires_grad:
            b._accumulate(g * a.data)

    return _result(data, (a, b), backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0.0
    data = np.where(mask, x.data, 0.0)

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * mask)

    return _result(data, (x,), backward)


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    flat = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(flat)
    pos = flat >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-flat[pos]))
    ex = np.exp(flat[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out.reshape(np.shape(x))


def sigmoid(x: Tensor) -> Tensor:
    data = _stable_sigmoid(x.data)

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * data * (1.0 - data))

    return _result(data, (x,), backward)


def concat(a: Tensor, b: Tensor, axis: int = 1) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError("concat requires rank-2 tensors")
    data = np.concatenate([a.data, b.data], axis=axis)
    split = a.data.shape[axis]

    def backward(g: np.ndarray) -> None:
        ga, gb = np.split(g, [split], axis=axis)
        if a.requires_grad:
            a._accumulate(ga)
        if b.requires_grad:
            b._accumulate(gb)

    return _result(data, (a, b), backward)


def gather_rows(x: Tensor, index: np.ndarray) -> Tensor:
    """Select rows of a rank-2 tensor; duplicated indices accumulate gradient."""
    if x.data.ndim != 2:
        raise ValueError("gather_rows requires a rank-2 tensor")
    idx = np.asarray(index, dtype=np.int64)
    data = x.data[idx]

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            np.add.at(gx, idx, g)
            x._accumulate(gx)

    return _result(data, (x,), backward)


def mean_all(x: Tensor) -> Tensor:
    data = np.asarray(x.data.mean())
    count = x.data.size

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(np.full_like(x.data, float(g) / count))

    return _result(data, (x,), backward)


def bce_loss(pred: Tensor, labels: np.ndarray) -> Tensor:
    """Mean binary cross-entropy; predictions clamped to [1e-7, 1 - 1e-7].

    Gradients vanish on the clamped region, matching the clipped forward.
    """
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != pred.data.shape:
        raise ValueError(f"label shape {y.shape} != prediction shape {pred.data.shape}")
    inside = (pred.data > _CLIP_LO) & (pred.data < _CLIP_HI)
    p = np.clip(pred.data, _CLIP_LO, _CLIP_HI)
    data = np.asarray(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))
    count = p.size

    def backward(g: np.ndarray) -> None:
        if pred.requires_grad:
            grad = (p - y) / (p * (1.0 - p)) / count
            pred._accumulate(float(g) * grad * inside)

    return _result(data, (pred,), backward)

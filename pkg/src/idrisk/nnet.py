"""Trainable parameters, layers and optimizers on top of the autodiff core.

Includes the mean-aggregator graph convolution used by the GCN models: each
node combines its own transformed features with the mean of its in-neighbor
features, so one layer propagates information along disclosure direction.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator
from weakref import WeakKeyDictionary

import numpy as np

from .autodiff import Tensor, add, matmul
from .graph import EcosystemGraph

CHECKPOINT_MAGIC = b"IDRISKP1"


class CheckpointError(ValueError):
    pass


class ParamStore:
    """Named trainable tensors with a seeded initializer."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._params: dict[str, Tensor] = {}

    def add(self, name: str, data: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        t = Tensor(np.asarray(data, dtype=np.float64), requires_grad=True)
        self._params[name] = t
        return t

    def glorot(self, name: str, shape: tuple[int, int]) -> Tensor:
        fan_in, fan_out = shape
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return self.add(name, self._rng.uniform(-bound, bound, size=shape))

    def zeros(self, name: str, shape: tuple[int, ...]) -> Tensor:
        return self.add(name, np.zeros(shape))

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return list(self._params)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._params.items())

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.zero_grad()

    def all_finite(self) -> bool:
        return all(np.isfinite(t.data).all() for t in self._params.values())

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self._params.items()}

    def restore(self, snap: dict[str, np.ndarray]) -> None:
        if set(snap) != set(self._params):
            raise ValueError("snapshot names do not match parameter names")
        for name, data in snap.items():
            self._params[name].data = data.copy()


@dataclass
class DenseLayer:
    W: Tensor
    b: Tensor


def make_dense(store: ParamStore, prefix: str, d_in: int, d_out: int, zero: bool = False) -> DenseLayer:
    if zero:
        W = store.zeros(f"{prefix}.W", (d_in, d_out))
    else:
        W = store.glorot(f"{prefix}.W", (d_in, d_out))
    b = store.zeros(f"{prefix}.b", (d_out,))
    return DenseLayer(W, b)


def dense(layer: DenseLayer, x: Tensor) -> Tensor:
    return add(matmul(x, layer.W), layer.b)


@dataclass
class SageConvLayer:
    W_self: Tensor
    W_neigh: Tensor
    bias: Tensor


def make_sage_conv(store: ParamStore, prefix: str, d_in: int, d_out: int) -> SageConvLayer:
    return SageConvLayer(
        W_self=store.glorot(f"{prefix}.W_self", (d_in, d_out)),
        W_neigh=store.glorot(f"{prefix}.W_neigh", (d_in, d_out)),
        bias=store.zeros(f"{prefix}.bias", (d_out,)),
    )


_AGG_CACHE: "WeakKeyDictionary[EcosystemGraph, np.ndarray]" = WeakKeyDictionary()


def neighbor_mean_matrix(g: EcosystemGraph) -> np.ndarray:
    """Row v holds 1/|N_in(v)| at its in-neighbors (distinct edges); zero rows
    for nodes without in-neighbors."""
    cached = _AGG_CACHE.get(g)
    if cached is not None:
        return cached
    n = g.n_nodes
    m = np.zeros((n, n))
    for v in range(n):
        in_edges = g.in_edges(v)
        if in_edges:
            share = 1.0 / len(in_edges)
            for u, _ in in_edges:
                m[v, u] = share
    _AGG_CACHE[g] = m
    return m


def sage_conv(layer: SageConvLayer, node_feats: Tensor, g: EcosystemGraph) -> Tensor:
    """out[v] = feats[v] @ W_self + mean_{u in N_in(v)} feats[u] @ W_neigh + bias."""
    if node_feats.shape[0] != g.n_nodes:
        raise ValueError(
            f"feature rows {node_feats.shape[0]} != node count {g.n_nodes}"
        )
    agg = Tensor(neighbor_mean_matrix(g))
    neigh = matmul(matmul(agg, node_feats), layer.W_neigh)
    return add(add(matmul(node_feats, layer.W_self), neigh), layer.bias)


class Adam:
    """Adam with bias correction; deterministic given the gradient sequence."""

    def __init__(
        self,
        store: ParamStore,
        lr: float = 0.01,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = {name: np.zeros_like(t.data) for name, t in store.items()}
        self._v = {name: np.zeros_like(t.data) for name, t in store.items()}

    def step(self, grads: dict[str, np.ndarray] | None = None) -> None:
        if grads is not None and set(grads) != set(self._m):
            raise ValueError("gradient names do not match parameter names")
        self.t += 1
        for name, param in self.store.items():
            g = grads[name] if grads is not None else param.grad
            if g is None:
                g = np.zeros_like(param.data)
            m = self._m[name]
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1**self.t)
            v_hat = v / (1.0 - self.beta2**self.t)
            param.data = param.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class SGD:
    """Plain gradient descent, kept for ablation runs."""

    def __init__(self, store: ParamStore, lr: float = 0.01):
        self.store = store
        self.lr = lr
        self.t = 0

    def step(self, grads: dict[str, np.ndarray] | None = None) -> None:
        if grads is not None and set(grads) != {n for n, _ in self.store.items()}:
            raise ValueError("gradient names do not match parameter names")
        self.t += 1
        for name, param in self.store.items():
            g = grads[name] if grads is not None else param.grad
            if g is None:
                continue
            param.data = param.data - self.lr * g


def make_optimizer(kind: str, store: ParamStore, lr: float):
    if kind == "adam":
        return Adam(store, lr=lr)
    if kind == "sgd":
        return SGD(store, lr=lr)
    raise ValueError(f"unknown optimizer {kind!r}")


# -- checkpoint serialization -------------------------------------------------
#
# Byte layout (little-endian), documented for external tooling:
#   8 bytes   magic "IDRISKP1"
#   u32       metadata length L
#   L bytes   UTF-8 JSON metadata
#   u32       tensor count
#   per tensor:
#     u16     name length K
#     K bytes UTF-8 name
#     u8      ndim
#     ndim*u32  dims
#     prod(dims)*f64  row-major data


def save_checkpoint(store: ParamStore, path: str | Path, meta: dict) -> None:
    meta_bytes = json.dumps(meta, ensure_ascii=False).encode("utf-8")
    chunks = [CHECKPOINT_MAGIC, struct.pack("<I", len(meta_bytes)), meta_bytes]
    names = store.names()
    chunks.append(struct.pack("<I", len(names)))
    for name in names:
        data = store[name].data
        name_bytes = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(name_bytes)))
        chunks.append(name_bytes)
        chunks.append(struct.pack("<B", data.ndim))
        for dim in data.shape:
            chunks.append(struct.pack("<I", dim))
        chunks.append(np.ascontiguousarray(data, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_checkpoint(path: str | Path) -> tuple[ParamStore, dict]:
    blob = Path(path).read_bytes()
    if blob[:8] != CHECKPOINT_MAGIC:
        raise CheckpointError("not an idrisk checkpoint")
    offset = 8

    def take(count: int) -> bytes:
        nonlocal offset
        if offset + count > len(blob):
            raise CheckpointError("truncated checkpoint")
        piece = blob[offset : offset + count]
        offset += count
        return piece

    meta_len = struct.unpack("<I", take(4))[0]
    meta = json.loads(take(meta_len).decode("utf-8"))
    count = struct.unpack("<I", take(4))[0]
    store = ParamStore(seed=int(meta.get("seed", 0)))
    for _ in range(count):
        name_len = struct.unpack("<H", take(2))[0]
        name = take(name_len).decode("utf-8")
        ndim = struct.unpack("<B", take(1))[0]
        dims = [struct.unpack("<I", take(4))[0] for _ in range(ndim)]
        size = int(np.prod(dims)) if dims else 1
        data = np.frombuffer(take(size * 8), dtype="<f8").reshape(dims).copy()
        store.add(name, data)
    return store, meta

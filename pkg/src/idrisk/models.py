"""Link predictors over the ecosystem graph and their training harness.

Three models score directed candidate edges (u, v):

* featureMLP: concatenated standardized node properties of both endpoints
  through a small MLP.
* featureGCN: two mean-aggregator graph convolutions produce node embeddings;
  an edge is scored from the elementwise product of its endpoint embeddings.
* seeGCN: featureGCN's structural branch fused with a semantic branch built
  from the endpoints' attribute-definition embeddings.

Training follows a 9:1 random link split with per-epoch resampled negative
pairs, full-batch cross-entropy and Adam.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import metrics
from .autodiff import Tensor, bce_loss, concat, gather_rows, mul, relu, sigmoid
from .graph import EcosystemGraph
from .nnet import (
    ParamStore,
    dense,
    make_dense,
    make_optimizer,
    make_sage_conv,
    sage_conv,
)
from .semantics import SemanticEmbedding, embedding_matrix

KINDS = ("featuremlp", "featuregcn", "seegcn")
DISPLAY_NAMES = {"featuremlp": "featureMLP", "featuregcn": "featureGCN", "seegcn": "seeGCN"}


def canonical_kind(kind: str) -> str:
    k = kind.lower()
    if k not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    return k


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    hidden_dim: int = 64
    mlp_hidden: tuple[int, ...] = (64, 32)
    epochs: int = 50
    lr: float = 0.01
    seed: int = 0
    optimizer: str = "adam"

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        object.__setattr__(self, "mlp_hidden", tuple(self.mlp_hidden))
        if self.hidden_dim < 1 or any(h < 1 for h in self.mlp_hidden):
            raise ValueError("hidden dimensions must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "hidden_dim": self.hidden_dim,
            "mlp_hidden": list(self.mlp_hidden),
            "epochs": self.epochs,
            "lr": self.lr,
            "seed": self.seed,
            "optimizer": self.optimizer,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ModelConfig":
        return cls(
            kind=obj["kind"],
            hidden_dim=obj["hidden_dim"],
            mlp_hidden=tuple(obj["mlp_hidden"]),
            epochs=obj["epochs"],
            lr=obj["lr"],
            seed=obj["seed"],
            optimizer=obj.get("optimizer", "adam"),
        )


@dataclass(frozen=True)
class EdgeScore:
    source: int
    target: int
    p: float


@dataclass
class LinkSplit:
    """Edge partition for training: message/supervision/validation sets."""

    train_message_edges: list[tuple[int, int]]
    train_supervision_pos: list[tuple[int, int]]
    val_pos: list[tuple[int, int]]
    train_neg: list[tuple[int, int]]
    val_neg: list[tuple[int, int]]
    split_seed: int


@dataclass
class TrainReport:
    kind: str
    config: dict
    split_seed: int
    train_loss: list[float]
    val_accuracy: list[float]
    best_val_accuracy: float
    best_epoch: int
    val_auc: float
    n_train_pos: int
    n_val_pos: int

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "split_seed": self.split_seed,
            "train_loss": self.train_loss,
            "val_accuracy": self.val_accuracy,
            "best_val_accuracy": self.best_val_accuracy,
            "best_epoch": self.best_epoch,
            "val_auc": self.val_auc,
            "n_train_pos": self.n_train_pos,
            "n_val_pos": self.n_val_pos,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TrainReport":
        return cls(**obj)


def sample_negatives(
    n_nodes: int,
    count: int,
    forbidden: set[tuple[int, int]],
    rng: np.random.Generator,
) -> list[tuple[int, int]]:
    """Uniform non-self pairs outside `forbidden`, without replacement."""
    available = n_nodes * (n_nodes - 1) - len(forbidden)
    if count > available:
        raise ValueError(
            f"graph too dense: need {count} negative pairs, only {available} available"
        )
    out: list[tuple[int, int]] = []
    taken: set[tuple[int, int]] = set()
    if available <= 4 * count:
        # Dense regime: enumerate the allowed pairs and sample exactly.
        pool = [
            (u, v)
            for u in range(n_nodes)
            for v in range(n_nodes)
            if u != v and (u, v) not in forbidden
        ]
        idx = rng.choice(len(pool), size=count, replace=False)
        return [pool[i] for i in idx]
    while len(out) < count:
        u = int(rng.integers(n_nodes))
        v = int(rng.integers(n_nodes))
        if u == v:
            continue
        pair = (u, v)
        if pair in forbidden or pair in taken:
            continue
        taken.add(pair)
        out.append(pair)
    return out


def random_link_split(
    g: EcosystemGraph, ratio: float = 0.9, seed: int = 0
) -> LinkSplit:
    """Shuffle edges by seed and partition positives 9:1 (train:val).

    Message edges are the training positives. Negatives are uniform non-edges,
    one per positive on each side, disjoint between train and validation.
    """
    edges = [(u, v) for u, v, _ in g.edges()]
    n_edges = len(edges)
    if n_edges < 10:
        raise ValueError(f"need at least 10 edges to split, got {n_edges}")
    n = g.n_nodes
    if n * (n - 1) - n_edges < n_edges:
        raise ValueError("graph too dense: not enough non-edges for negative sampling")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    perm = rng.permutation(n_edges)
    n_val = int(round(n_edges * (1.0 - ratio)))
    n_val = max(1, min(n_val, n_edges - 1))
    val_pos = [edges[i] for i in perm[:n_val]]
    train_pos = [edges[i] for i in perm[n_val:]]

    edge_set = g.edge_set()
    train_neg = sample_negatives(n, len(train_pos), edge_set, rng)
    forbidden = edge_set | set(train_neg)
    val_neg = sample_negatives(n, len(val_pos), forbidden, rng)
    return LinkSplit(
        train_message_edges=list(train_pos),
        train_supervision_pos=train_pos,
        val_pos=val_pos,
        train_neg=train_neg,
        val_neg=val_neg,
        split_seed=seed,
    )


def message_graph(g: EcosystemGraph, split: LinkSplit) -> EcosystemGraph:
    """The training message graph: same nodes, training edges only."""
    keep = set(split.train_message_edges)
    return EcosystemGraph(
        g.node_names, {(u, v): g.weight(u, v) for (u, v) in keep}
    )


# -- parameter initialization -------------------------------------------------


def init_params(config: ModelConfig, emb_dim: int | None = None) -> ParamStore:
    """Seeded Glorot-uniform hidden layers; the classifier head starts at zero
    so a fresh model scores 0.5 everywhere (epoch-1 loss = ln 2)."""
    store = ParamStore(seed=config.seed)
    h = config.hidden_dim
    if config.kind == "featuremlp":
        d = 8
        for i, width in enumerate(config.mlp_hidden):
            make_dense(store, f"mlp.l{i}", d, width)
            d = width
        make_dense(store, "mlp.head", d, 1, zero=True)
    elif config.kind == "featuregcn":
        make_sage_conv(store, "gcn.sage1", 4, h)
        make_sage_conv(store, "gcn.sage2", h, h)
        make_dense(store, "gcn.head", h, 1, zero=True)
    elif config.kind == "seegcn":
        if emb_dim is None:
            raise ValueError("seegcn requires the semantic embedding dimension")
        make_sage_conv(store, "gcn.sage1", 4, h)
        make_sage_conv(store, "gcn.sage2", h, h)
        make_dense(store, "see.fc", 2 * emb_dim, h)
        make_dense(store, "see.head", 2 * h, 1, zero=True)
    return store


def _layer(store: ParamStore, prefix: str):
    from .nnet import DenseLayer, SageConvLayer

    if f"{prefix}.W_self" in store:
        return SageConvLayer(store[f"{prefix}.W_self"], store[f"{prefix}.W_neigh"], store[f"{prefix}.bias"])
    return DenseLayer(store[f"{prefix}.W"], store[f"{prefix}.b"])


# -- forward passes -----------------------------------------------------------


def _pairs_arrays(pairs: Sequence[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    us = np.asarray([p[0] for p in pairs], dtype=np.int64)
    vs = np.asarray([p[1] for p in pairs], dtype=np.int64)
    return us, vs


def _check_pairs(pairs: Sequence[tuple[int, int]], n_nodes: int) -> None:
    for u, v in pairs:
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise KeyError(f"unknown node id in pair ({u}, {v})")


def _gcn_embeddings(store: ParamStore, feats: np.ndarray, g_message: EcosystemGraph) -> Tensor:
    x = Tensor(feats)
    h1 = relu(sage_conv(_layer(store, "gcn.sage1"), x, g_message))
    return sage_conv(_layer(store, "gcn.sage2"), h1, g_message)


def forward_pairs(
    kind: str,
    store: ParamStore,
    feats: np.ndarray,
    pairs: Sequence[tuple[int, int]],
    g_message: EcosystemGraph | None = None,
    sem_matrix: np.ndarray | None = None,
) -> Tensor:
    """Differentiable probability column for the given node pairs."""
    kind = canonical_kind(kind)
    _check_pairs(pairs, feats.shape[0])
    us, vs = _pairs_arrays(pairs)
    if kind == "featuremlp":
        inp = Tensor(np.hstack([feats[us], feats[vs]]))
        hidden = inp
        i = 0
        while f"mlp.l{i}.W" in store:
            hidden = relu(dense(_layer(store, f"mlp.l{i}"), hidden))
            i += 1
        return sigmoid(dense(_layer(store, "mlp.head"), hidden))
    if g_message is None:
        raise ValueError(f"{kind} requires a message graph")
    h2 = _gcn_embeddings(store, feats, g_message)
    a1 = mul(gather_rows(h2, us), gather_rows(h2, vs))
    if kind == "featuregcn":
        return sigmoid(dense(_layer(store, "gcn.head"), a1))
    if sem_matrix is None:
        raise ValueError("seegcn requires semantic embeddings")
    se = Tensor(np.hstack([sem_matrix[us], sem_matrix[vs]]))
    a2 = relu(dense(_layer(store, "see.fc"), se))
    a3 = concat(a1, a2)
    return sigmoid(dense(_layer(store, "see.head"), a3))


def _scores(
    kind: str,
    store: ParamStore,
    feats: np.ndarray,
    pairs: Sequence[tuple[int, int]],
    g_message: EcosystemGraph | None = None,
    sem_matrix: np.ndarray | None = None,
) -> np.ndarray:
    if not pairs:
        return np.zeros(0)
    out = forward_pairs(kind, store, feats, pairs, g_message, sem_matrix)
    return out.data.reshape(-1)


def score_featureMLP(
    store: ParamStore, feats: np.ndarray, pairs: Sequence[tuple[int, int]]
) -> list[EdgeScore]:
    p = _scores("featuremlp", store, feats, pairs)
    return [EdgeScore(u, v, float(x)) for (u, v), x in zip(pairs, p)]


def score_featureGCN(
    store: ParamStore,
    feats: np.ndarray,
    g_message: EcosystemGraph,
    pairs: Sequence[tuple[int, int]],
) -> list[EdgeScore]:
    p = _scores("featuregcn", store, feats, pairs, g_message)
    return [EdgeScore(u, v, float(x)) for (u, v), x in zip(pairs, p)]


def score_seeGCN(
    store: ParamStore,
    feats: np.ndarray,
    sem: dict[int, SemanticEmbedding],
    g_message: EcosystemGraph,
    pairs: Sequence[tuple[int, int]],
) -> list[EdgeScore]:
    sem_matrix = embedding_matrix(sem, g_message.n_nodes)
    p = _scores("seegcn", store, feats, pairs, g_message, sem_matrix)
    return [EdgeScore(u, v, float(x)) for (u, v), x in zip(pairs, p)]


# -- training and evaluation --------------------------------------------------


def accuracy_from_scores(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    """Positives count when scored > 0.5; negatives when scored <= 0.5."""
    correct = int((pos_scores > 0.5).sum()) + int((neg_scores <= 0.5).sum())
    total = len(pos_scores) + len(neg_scores)
    return correct / total if total else 0.0


def auc_from_scores(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    """Rank-based AUC with tie averaging (auxiliary reporting metric)."""
    n_p, n_n = len(pos_scores), len(neg_scores)
    if n_p == 0 or n_n == 0:
        return 0.0
    scores = np.concatenate([pos_scores, neg_scores])
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_rank_sum = ranks[:n_p].sum()
    return float((pos_rank_sum - n_p * (n_p + 1) / 2.0) / (n_p * n_n))


def evaluate(
    store: ParamStore,
    kind: str,
    split: LinkSplit,
    feats: np.ndarray,
    g_message: EcosystemGraph | None,
    sem_matrix: np.ndarray | None = None,
) -> float:
    pos = _scores(kind, store, feats, split.val_pos, g_message, sem_matrix)
    neg = _scores(kind, store, feats, split.val_neg, g_message, sem_matrix)
    return accuracy_from_scores(pos, neg)


def train(
    g: EcosystemGraph,
    config: ModelConfig,
    split: LinkSplit,
    sem: dict[int, SemanticEmbedding] | None = None,
) -> tuple[ParamStore, TrainReport]:
    """Train one model on a link split; returns the best-accuracy checkpoint.

    Each epoch resamples training negatives (seeded by epoch), runs one
    full-batch Adam step on the supervision pairs, then measures validation
    accuracy. Deterministic for fixed (config.seed, split.split_seed).
    """
    kind = config.kind
    if kind == "seegcn" and sem is None:
        raise ValueError("seegcn training requires semantic embeddings")
    table = metrics.feature_table(g)
    feats, _ = metrics.standardize(table)
    g_msg = message_graph(g, split) if kind != "featuremlp" else None
    sem_matrix = embedding_matrix(sem, g.n_nodes) if sem is not None else None
    emb_dim = sem_matrix.shape[1] if sem_matrix is not None else None

    store = init_params(config, emb_dim=emb_dim)
    opt = make_optimizer(config.optimizer, store, config.lr)

    edge_set = g.edge_set()
    val_neg_set = set(split.val_neg)
    n_pos = len(split.train_supervision_pos)
    labels = np.concatenate([np.ones(n_pos), np.zeros(n_pos)]).reshape(-1, 1)

    losses: list[float] = []
    accuracies: list[float] = []
    best_acc = -1.0
    best_epoch = 0
    best_snap: dict[str, np.ndarray] = {}

    for epoch in range(1, config.epochs + 1):
        rng = np.random.default_rng(
            np.random.SeedSequence([config.seed, split.split_seed, epoch])
        )
        train_neg = sample_negatives(
            g.n_nodes, n_pos, edge_set | val_neg_set, rng
        )
        pairs = list(split.train_supervision_pos) + train_neg
        store.zero_grad()
        pred = forward_pairs(kind, store, feats, pairs, g_msg, sem_matrix)
        loss = bce_loss(pred, labels)
        loss.backward()
        opt.step()
        if not store.all_finite():
            raise FloatingPointError(f"non-finite parameter after epoch {epoch}")

        acc = evaluate(store, kind, split, feats, g_msg, sem_matrix)
        losses.append(float(loss.data))
        accuracies.append(acc)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_snap = store.snapshot()

    store.restore(best_snap)
    val_auc = auc_from_scores(
        _scores(kind, store, feats, split.val_pos, g_msg, sem_matrix),
        _scores(kind, store, feats, split.val_neg, g_msg, sem_matrix),
    )
    report = TrainReport(
        kind=kind,
        config=config.to_json_obj(),
        split_seed=split.split_seed,
        train_loss=losses,
        val_accuracy=accuracies,
        best_val_accuracy=best_acc,
        best_epoch=best_epoch,
        val_auc=val_auc,
        n_train_pos=n_pos,
        n_val_pos=len(split.val_pos),
    )
    return store, report

"""Node property computations over the ecosystem graph.

Provides the four model input features (in degree, out degree, betweenness
centrality, closeness centrality) plus forward/reverse PageRank for the risk
scorer. Betweenness and closeness run on the unweighted directed structure;
PageRank transitions carry the empirical edge weights.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import BACKEND_NAME, HAVE_COMPILED, get_kernels
from .graph import EcosystemGraph

__all__ = [
    "BACKEND_NAME",
    "HAVE_COMPILED",
    "NodeFeatureTable",
    "FeatureStandardization",
    "degrees",
    "betweenness",
    "closeness",
    "pagerank",
    "feature_table",
    "standardize",
]


def degrees(g: EcosystemGraph) -> tuple[np.ndarray, np.ndarray]:
    """Per-node (in_degree, out_degree) counting distinct edges, weights ignored."""
    n = g.n_nodes
    in_deg = np.zeros(n, dtype=np.int64)
    out_deg = np.zeros(n, dtype=np.int64)
    for u, v, _ in g.edges():
        out_deg[u] += 1
        in_deg[v] += 1
    return in_deg, out_deg


def betweenness(g: EcosystemGraph, backend: str | None = None) -> np.ndarray:
    """Directed unweighted betweenness via Brandes accumulation.

    Raw pair-dependency sums: endpoints are not counted and no normalization
    is applied; shortest-path ties split fractionally.
    """
    kern = get_kernels(backend)
    indptr, indices, _ = g.csr()
    return kern.brandes_betweenness(indptr, indices, g.n_nodes)


def closeness(g: EcosystemGraph, backend: str | None = None) -> np.ndarray:
    """Incoming-distance closeness with the Wasserman-Faust correction.

    For node v with r nodes able to reach it at total unweighted distance D:
    closeness = (r / (n-1)) * (r / D); 0 when r = 0 or D = 0.
    """
    kern = get_kernels(backend)
    rindptr, rindices, _ = g.csr(reverse=True)
    return kern.incoming_closeness(rindptr, rindices, g.n_nodes)


def pagerank(
    g: EcosystemGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
    reverse: bool = False,
) -> np.ndarray:
    """Weighted PageRank by power iteration.

    Edge weights act as transition mass (rows normalized by total outgoing
    weight); dangling nodes redistribute uniformly. Starts uniform and stops
    when the L1 change drops to `tol`. reverse=True runs the identical
    procedure on the transposed graph.
    """
    n = g.n_nodes
    if n == 0:
        raise ValueError("pagerank requires a non-empty graph")
    src_list: list[int] = []
    dst_list: list[int] = []
    w_list: list[float] = []
    for u, v, w in g.edges():
        if reverse:
            u, v = v, u
        src_list.append(u)
        dst_list.append(v)
        w_list.append(float(w))
    src = np.asarray(src_list, dtype=np.int64)
    dst = np.asarray(dst_list, dtype=np.int64)
    wgt = np.asarray(w_list, dtype=np.float64)

    out_weight = np.zeros(n, dtype=np.float64)
    np.add.at(out_weight, src, wgt)
    dangling = out_weight == 0.0
    trans = wgt / out_weight[src] if len(src) else wgt

    x = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iter):
        dangling_mass = x[dangling].sum()
        x_new = np.full(n, base + damping * dangling_mass / n)
        if len(src):
            np.add.at(x_new, dst, damping * x[src] * trans)
        if np.abs(x_new - x).sum() <= tol:
            x = x_new
            break
        x = x_new
    return x


@dataclass
class NodeFeatureTable:
    """Per-node metrics in node-id order."""

    names: list[str]
    in_degree: np.ndarray
    out_degree: np.ndarray
    betweenness: np.ndarray
    closeness: np.ndarray
    pagerank: np.ndarray
    reverse_pagerank: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    def structural_columns(self) -> np.ndarray:
        """The 4 model input columns: in degree, out degree, betweenness, closeness."""
        return np.column_stack(
            [
                self.in_degree.astype(np.float64),
                self.out_degree.astype(np.float64),
                self.betweenness,
                self.closeness,
            ]
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "node",
                    "in_degree",
                    "out_degree",
                    "betweenness",
                    "closeness",
                    "pagerank",
                    "reverse_pagerank",
                ]
            )
            for i, name in enumerate(self.names):
                writer.writerow(
                    [
                        name,
                        int(self.in_degree[i]),
                        int(self.out_degree[i]),
                        repr(float(self.betweenness[i])),
                        repr(float(self.closeness[i])),
                        repr(float(self.pagerank[i])),
                        repr(float(self.reverse_pagerank[i])),
                    ]
                )

    def to_json_obj(self) -> dict:
        return {
            "names": self.names,
            "in_degree": self.in_degree.tolist(),
            "out_degree": self.out_degree.tolist(),
            "betweenness": self.betweenness.tolist(),
            "closeness": self.closeness.tolist(),
            "pagerank": self.pagerank.tolist(),
            "reverse_pagerank": self.reverse_pagerank.tolist(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "NodeFeatureTable":
        return cls(
            names=list(obj["names"]),
            in_degree=np.asarray(obj["in_degree"], dtype=np.int64),
            out_degree=np.asarray(obj["out_degree"], dtype=np.int64),
            betweenness=np.asarray(obj["betweenness"], dtype=np.float64),
            closeness=np.asarray(obj["closeness"], dtype=np.float64),
            pagerank=np.asarray(obj["pagerank"], dtype=np.float64),
            reverse_pagerank=np.asarray(obj["reverse_pagerank"], dtype=np.float64),
        )


def feature_table(g: EcosystemGraph, backend: str | None = None) -> NodeFeatureTable:
    """Assemble every node metric for the graph."""
    in_deg, out_deg = degrees(g)
    n = g.n_nodes
    if n == 0:
        empty = np.zeros(0, dtype=np.float64)
        return NodeFeatureTable([], in_deg, out_deg, empty, empty.copy(), empty.copy(), empty.copy())
    return NodeFeatureTable(
        names=g.node_names,
        in_degree=in_deg,
        out_degree=out_deg,
        betweenness=betweenness(g, backend=backend),
        closeness=closeness(g, backend=backend),
        pagerank=pagerank(g, reverse=False),
        reverse_pagerank=pagerank(g, reverse=True),
    )


@dataclass(frozen=True)
class FeatureStandardization:
    """Per-column mean/std fitted on a feature table, reused at query time."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, columns: np.ndarray) -> np.ndarray:
        safe = np.where(self.std < 1e-12, 1.0, self.std)
        return (columns - self.mean) / safe

    def to_json_obj(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FeatureStandardization":
        return cls(
            mean=np.asarray(obj["mean"], dtype=np.float64),
            std=np.asarray(obj["std"], dtype=np.float64),
        )


def standardize(table: NodeFeatureTable) -> tuple[np.ndarray, FeatureStandardization]:
    """Fit column standardization on the table's 4 structural columns.

    Returns the standardized matrix and the fitted parameters. Columns whose
    std falls below 1e-12 are centered only (the skip rule), leaving
    zero-variance columns at exactly zero.
    """
    cols = table.structural_columns()
    mean = cols.mean(axis=0) if len(cols) else np.zeros(4)
    std = cols.std(axis=0) if len(cols) else np.zeros(4)
    params = FeatureStandardization(mean=mean, std=std)
    return params.apply(cols), params

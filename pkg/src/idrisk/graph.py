"""The Identity Ecosystem graph.

Nodes are PII attribute names; a directed edge a -> b with integer weight w
records that across the analyzed cases, an event disclosing a led to a
disclosure of b in w input/output co-occurrences. The graph is immutable
after construction and safe to share between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cases import CaseRecord


class UnknownNodeError(KeyError):
    def __init__(self, name: str, suggestions: Sequence[str] = ()):
        self.name = name
        self.suggestions = list(suggestions)
        msg = f"unknown attribute {name!r}"
        if self.suggestions:
            msg += f" (did you mean: {', '.join(self.suggestions)}?)"
        super().__init__(msg)

    def __str__(self) -> str:  # KeyError quotes its arg by default
        return self.args[0]


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed or violates invariants."""


@dataclass(frozen=True)
class DisclosureProb:
    """Probability that disclosing `source` leads to disclosing `target`."""

    source: int
    target: int
    p: float


class EcosystemGraph:
    """Directed weighted graph over PII attributes with dense integer node ids."""

    def __init__(self, names: Sequence[str], weights: dict[tuple[int, int], int]):
        names = list(names)
        if len(set(names)) != len(names):
            raise GraphFormatError("duplicate node names")
        n = len(names)
        for (u, v), w in weights.items():
            if u == v:
                raise GraphFormatError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range")
            if not isinstance(w, int) or w < 1:
                raise GraphFormatError(f"edge ({u}, {v}) weight {w!r} must be a positive integer")
        self._names = names
        self._ids = {name: i for i, name in enumerate(names)}
        self._w = dict(weights)
        self._out: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self._in: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (u, v), w in sorted(self._w.items()):
            self._out[u].append((v, w))
            self._in[v].append((u, w))

    # -- introspection ------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self._names)

    @property
    def n_edges(self) -> int:
        return len(self._w)

    @property
    def total_weight(self) -> int:
        return sum(self._w.values())

    @property
    def node_names(self) -> list[str]:
        return list(self._names)

    def label(self) -> str:
        return f"G_({self.n_nodes},{self.n_edges})"

    def has_node(self, name: str) -> bool:
        return name in self._ids

    def node_id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            import difflib

            suggestions = difflib.get_close_matches(name, self._names, n=3, cutoff=0.5)
            raise UnknownNodeError(name, suggestions) from None

    def node_name(self, node: int) -> str:
        return self._names[node]

    def edges(self) -> list[tuple[int, int, int]]:
        """All edges as (source, target, weight), sorted by (source, target)."""
        return [(u, v, w) for (u, v), w in sorted(self._w.items())]

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self._w.keys())

    def weight(self, u: int, v: int) -> int:
        return self._w.get((u, v), 0)

    def out_edges(self, u: int) -> list[tuple[int, int]]:
        return list(self._out[u])

    def in_edges(self, v: int) -> list[tuple[int, int]]:
        return list(self._in[v])

    def out_weight(self, u: int) -> int:
        return sum(w for _, w in self._out[u])

    def csr(self, reverse: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency in CSR form: (indptr int64, indices int32, weights float64).

        reverse=True yields in-neighbor adjacency (the transposed graph).
        """
        adj = self._in if reverse else self._out
        n = self.n_nodes
        indptr = np.zeros(n + 1, dtype=np.int64)
        for u in range(n):
            indptr[u + 1] = indptr[u] + len(adj[u])
        indices = np.empty(indptr[-1], dtype=np.int32)
        weights = np.empty(indptr[-1], dtype=np.float64)
        pos = 0
        for u in range(n):
            for v, w in adj[u]:
                indices[pos] = v
                weights[pos] = w
                pos += 1
        return indptr, indices, weights

    def __eq__(self, other) -> bool:
        if not isinstance(other, EcosystemGraph):
            return NotImplemented
        return self._names == other._names and self._w == other._w

    # Graphs are immutable but compared structurally; identity hashing keeps
    # them usable as cache keys (e.g. the aggregation-matrix cache).
    __hash__ = object.__hash__

    def __repr__(self) -> str:
        return f"EcosystemGraph(nodes={self.n_nodes}, edges={self.n_edges})"

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(
        cls, names: Sequence[str], edges: Iterable[tuple[int, int, int]]
    ) -> "EcosystemGraph":
        weights: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            key = (int(u), int(v))
            if key in weights:
                raise GraphFormatError(f"duplicate edge {key}")
            weights[key] = int(w)
        return cls(names, weights)

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "format": "idrisk-graph",
            "version": 1,
            "nodes": list(self._names),
            "edges": [[u, v, w] for u, v, w in self.edges()],
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_json_obj(), ensure_ascii=False).encode("utf-8")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "EcosystemGraph":
        if not isinstance(obj, dict) or obj.get("format") != "idrisk-graph":
            raise GraphFormatError("not an idrisk graph file")
        if obj.get("version") != 1:
            raise GraphFormatError(f"unsupported graph version {obj.get('version')!r}")
        nodes = obj.get("nodes")
        edges = obj.get("edges")
        if not isinstance(nodes, list) or not isinstance(edges, list):
            raise GraphFormatError("missing nodes/edges arrays")
        weights: dict[tuple[int, int], int] = {}
        for entry in edges:
            if not (isinstance(entry, list) and len(entry) == 3):
                raise GraphFormatError(f"bad edge entry {entry!r}")
            u, v, w = entry
            if not all(isinstance(x, int) for x in (u, v, w)):
                raise GraphFormatError(f"bad edge entry {entry!r}")
            if (u, v) in weights:
                raise GraphFormatError(f"duplicate edge ({u}, {v})")
            weights[(u, v)] = w
        return cls(nodes, weights)


def build_graph(cases: Sequence[CaseRecord]) -> EcosystemGraph:
    """Construct the ecosystem graph from case records.

    Each (input a, output b) pair with a != b in a case increments edge a->b
    by one. Every attribute mentioned by any case becomes a node; node ids
    follow first appearance across the case list (inputs before outputs).
    """
    if not cases:
        raise ValueError("cannot build a graph from an empty case list")
    names: list[str] = []
    ids: dict[str, int] = {}

    def intern(name: str) -> int:
        if name not in ids:
            ids[name] = len(names)
            names.append(name)
        return ids[name]

    weights: dict[tuple[int, int], int] = {}
    for case in cases:
        in_ids = [intern(a) for a in case.inputs]
        out_ids = [intern(b) for b in case.outputs]
        for a in in_ids:
            for b in out_ids:
                if a == b:
                    continue
                weights[(a, b)] = weights.get((a, b), 0) + 1
    return EcosystemGraph(names, weights)


def disclosure_probabilities(g: EcosystemGraph, source: int | str) -> list[DisclosureProb]:
    """Per-target disclosure probability: w(source->t) / total outgoing weight."""
    u = g.node_id(source) if isinstance(source, str) else source
    if not (0 <= u < g.n_nodes):
        raise UnknownNodeError(str(u))
    out = g.out_edges(u)
    total = sum(w for _, w in out)
    return [DisclosureProb(u, v, w / total) for v, w in out]


def graph_stats(g: EcosystemGraph) -> dict:
    return {
        "n_nodes": g.n_nodes,
        "n_edges": g.n_edges,
        "total_weight": g.total_weight,
    }


def save_graph(g: EcosystemGraph, path: str | Path) -> None:
    Path(path).write_bytes(g.to_json_bytes())


def load_graph(path: str | Path) -> EcosystemGraph:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"cannot parse graph file: {exc.msg}") from exc
    return EcosystemGraph.from_json_obj(obj)

"""Risk score calculation: from lost attributes to a ranked disclosure report.

For every other node n_i the pipeline combines the model's link probability
p_i (max over the lost attributes) with a structural score S_i, the sum of
the node's forward and reverse PageRank. The raw product RS_i = p_i * S_i is
scaled to [0, 100] by the per-query maximum, so the top candidate always
scores exactly 100.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .graph import EcosystemGraph, UnknownNodeError
from .metrics import NodeFeatureTable, standardize
from .models import canonical_kind, forward_pairs
from .nnet import ParamStore
from .semantics import SemanticEmbedding, embedding_matrix


@dataclass(frozen=True)
class RiskQuery:
    lost_attributes: tuple[str, ...]
    threshold: float = 0.0
    model_kind: str = "featuregcn"

    def __post_init__(self):
        if not self.lost_attributes:
            raise ValueError("at least one lost attribute is required")
        if not (0.0 <= self.threshold <= 100.0):
            raise ValueError("threshold must lie in [0, 100]")
        object.__setattr__(self, "model_kind", canonical_kind(self.model_kind))


@dataclass(frozen=True)
class RiskCandidate:
    attribute: str
    p: float
    s: float
    rs_raw: float
    rs: float


@dataclass(frozen=True)
class RiskReport:
    lost_attributes: tuple[str, ...]
    threshold: float
    model_kind: str
    candidates: tuple[RiskCandidate, ...]

    def to_json_obj(self) -> dict:
        return {
            "query": {
                "lost": list(self.lost_attributes),
                "threshold": self.threshold,
                "model": self.model_kind,
            },
            "candidates": [
                {
                    "attribute": c.attribute,
                    "p": c.p,
                    "s": c.s,
                    "rs_raw": c.rs_raw,
                    "rs": c.rs,
                }
                for c in self.candidates
            ],
            "threshold": self.threshold,
            "model": self.model_kind,
        }

    def to_json_bytes(self) -> bytes:
        """Canonical serialization; CLI files and HTTP bodies must match byte-for-byte."""
        return json.dumps(
            self.to_json_obj(), ensure_ascii=False, separators=(",", ":")
        ).encode("utf-8")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RiskReport":
        return cls(
            lost_attributes=tuple(obj["query"]["lost"]),
            threshold=obj["threshold"],
            model_kind=obj["model"],
            candidates=tuple(
                RiskCandidate(
                    attribute=c["attribute"],
                    p=c["p"],
                    s=c["s"],
                    rs_raw=c["rs_raw"],
                    rs=c["rs"],
                )
                for c in obj["candidates"]
            ),
        )


def structural_score(table: NodeFeatureTable, node: int) -> float:
    """S_i: forward plus reverse PageRank of the node."""
    if not (0 <= node < table.n_nodes):
        raise UnknownNodeError(str(node))
    return float(table.pagerank[node] + table.reverse_pagerank[node])


def _rank_and_filter(
    entries: list[tuple[str, float, float, float]], threshold: float
) -> tuple[RiskCandidate, ...]:
    """Normalize raw scores by their maximum to [0, 100], filter and sort."""
    max_raw = max((rs_raw for _, _, _, rs_raw in entries), default=0.0)
    candidates = []
    for attribute, p, s, rs_raw in entries:
        rs = (rs_raw / max_raw) * 100.0 if max_raw > 0 else 0.0
        if rs >= threshold:
            candidates.append(RiskCandidate(attribute, p, s, rs_raw, rs))
    candidates.sort(key=lambda c: (-c.rs, c.attribute))
    return tuple(candidates)


def assess(
    query: RiskQuery,
    g: EcosystemGraph,
    table: NodeFeatureTable,
    store: ParamStore,
    sem: dict[int, SemanticEmbedding] | None = None,
) -> RiskReport:
    """Score every non-lost node against the lost set.

    p_i is the maximum link probability from any lost attribute to the
    candidate; the full graph serves as the message graph at query time.
    Model inputs are the table's standardized structural columns, matching
    what training used on the same graph.
    """
    feats, _ = standardize(table)
    lost_ids = [g.node_id(name) for name in query.lost_attributes]
    lost_set = set(lost_ids)
    candidates = [i for i in range(g.n_nodes) if i not in lost_set]
    report_empty = RiskReport(
        lost_attributes=tuple(query.lost_attributes),
        threshold=query.threshold,
        model_kind=query.model_kind,
        candidates=(),
    )
    if not candidates:
        return report_empty
    pairs = [(a, c) for a in lost_ids for c in candidates]
    sem_matrix = embedding_matrix(sem, g.n_nodes) if sem is not None else None
    scores = forward_pairs(
        query.model_kind, store, feats, pairs, g_message=g, sem_matrix=sem_matrix
    ).data.reshape(len(lost_ids), len(candidates))
    p = scores.max(axis=0)

    entries = []
    for j, node in enumerate(candidates):
        s = structural_score(table, node)
        p_j = float(p[j])
        entries.append((g.node_name(node), p_j, s, p_j * s))
    return replace(report_empty, candidates=_rank_and_filter(entries, query.threshold))


def manual_override(report: RiskReport, overrides: dict[str, float]) -> RiskReport:
    """Replace normalized scores for chosen candidates, then re-sort and re-filter."""
    present = {c.attribute for c in report.candidates}
    for attribute, score in overrides.items():
        if attribute not in present:
            raise UnknownNodeError(attribute, sorted(present)[:3])
        if not (0.0 <= score <= 100.0):
            raise ValueError(f"override for {attribute!r} outside [0, 100]")
    updated = []
    for c in report.candidates:
        if c.attribute in overrides:
            c = replace(c, rs=float(overrides[c.attribute]))
        if c.rs >= report.threshold:
            updated.append(c)
    updated.sort(key=lambda c: (-c.rs, c.attribute))
    return replace(report, candidates=tuple(updated))

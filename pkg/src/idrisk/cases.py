"""Identity theft/fraud case records: loading, filtering and synthesis.

A case record captures one analyzed incident: which PII attributes the actors
used (inputs) and which attributes ended up exposed (outputs), plus optional
metadata used for corpus filtering (monetary loss, market sector, victim age).
Case files are JSON Lines, one case per line, UTF-8.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

_WS = re.compile(r"\s+")

SECTORS = ("finance", "healthcare", "retail", "government", "education")


class CaseParseError(ValueError):
    """A case line that cannot be turned into a valid record."""

    def __init__(self, reason: str, line_number: int | None = None):
        self.reason = reason
        self.line_number = line_number
        if line_number is None:
            super().__init__(reason)
        else:
            super().__init__(f"line {line_number}: {reason}")


def normalize_attribute(name: str) -> str:
    """Trim, lowercase and collapse internal whitespace to single spaces."""
    return _WS.sub(" ", name.strip()).lower()


def _normalize_list(values: Sequence[str], field: str) -> tuple[str, ...]:
    if not isinstance(values, (list, tuple)):
        raise CaseParseError(f"{field} must be a list of strings")
    out: list[str] = []
    seen: set[str] = set()
    for v in values:
        if not isinstance(v, str):
            raise CaseParseError(f"{field} entries must be strings")
        norm = normalize_attribute(v)
        if norm and norm not in seen:
            seen.add(norm)
            out.append(norm)
    if not out:
        raise CaseParseError(f"{field} is empty after normalization")
    return tuple(out)


@dataclass(frozen=True)
class CaseRecord:
    """One identity theft/fraud case with normalized attribute lists."""

    case_id: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    loss_usd: float | None = None
    sector: str | None = None
    victim_age: int | None = None

    def __post_init__(self):
        if not self.case_id:
            raise CaseParseError("case_id is empty")
        for field_name in ("inputs", "outputs"):
            values = getattr(self, field_name)
            if not values:
                raise CaseParseError(f"{field_name} is empty")
            if len(set(values)) != len(values):
                raise CaseParseError(f"duplicate attribute in {field_name}")
            for v in values:
                if v != normalize_attribute(v) or not v:
                    raise CaseParseError(f"unnormalized attribute {v!r} in {field_name}")
        if self.loss_usd is not None and self.loss_usd < 0:
            raise CaseParseError("loss_usd must be non-negative")
        if self.victim_age is not None and self.victim_age < 0:
            raise CaseParseError("victim_age must be non-negative")

    @classmethod
    def from_raw(cls, obj: dict) -> "CaseRecord":
        """Build a record from a decoded JSON object, normalizing attributes."""
        if not isinstance(obj, dict):
            raise CaseParseError("case must be a JSON object")
        case_id = obj.get("case_id")
        if not isinstance(case_id, str) or not case_id:
            raise CaseParseError("missing or invalid case_id")
        if "inputs" not in obj:
            raise CaseParseError("missing inputs")
        if "outputs" not in obj:
            raise CaseParseError("missing outputs")
        loss = obj.get("loss_usd")
        if loss is not None and not isinstance(loss, (int, float)):
            raise CaseParseError("loss_usd must be a number")
        sector = obj.get("sector")
        if sector is not None and not isinstance(sector, str):
            raise CaseParseError("sector must be a string")
        age = obj.get("victim_age")
        if age is not None and not isinstance(age, int):
            raise CaseParseError("victim_age must be an integer")
        return cls(
            case_id=case_id,
            inputs=_normalize_list(obj["inputs"], "inputs"),
            outputs=_normalize_list(obj["outputs"], "outputs"),
            loss_usd=float(loss) if loss is not None else None,
            sector=sector,
            victim_age=age,
        )

    def to_json_obj(self) -> dict:
        obj: dict = {
            "case_id": self.case_id,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
        }
        if self.loss_usd is not None:
            obj["loss_usd"] = self.loss_usd
        if self.sector is not None:
            obj["sector"] = self.sector
        if self.victim_age is not None:
            obj["victim_age"] = self.victim_age
        return obj


@dataclass(frozen=True)
class CaseFilter:
    """Conjunctive case predicate; a case missing a targeted field is excluded."""

    min_loss_usd: float | None = None
    sector: str | None = None
    victim_age_range: tuple[int, int] | None = None

    def __post_init__(self):
        if self.victim_age_range is not None:
            lo, hi = self.victim_age_range
            if lo > hi:
                raise ValueError("victim_age_range min exceeds max")

    def matches(self, case: CaseRecord) -> bool:
        if self.min_loss_usd is not None:
            if case.loss_usd is None or case.loss_usd < self.min_loss_usd:
                return False
        if self.sector is not None:
            if case.sector is None or case.sector != self.sector:
                return False
        if self.victim_age_range is not None:
            lo, hi = self.victim_age_range
            if case.victim_age is None or not (lo <= case.victim_age <= hi):
                return False
        return True

    def is_empty(self) -> bool:
        return (
            self.min_loss_usd is None
            and self.sector is None
            and self.victim_age_range is None
        )

    def to_json_obj(self) -> dict:
        return {
            "min_loss_usd": self.min_loss_usd,
            "sector": self.sector,
            "victim_age_range": list(self.victim_age_range) if self.victim_age_range else None,
        }


@dataclass(frozen=True)
class SynthConfig:
    """Parameters for the community-structured synthetic case generator."""

    n_attributes: int
    n_cases: int
    n_communities: int
    intra_community_bias: float
    seed: int

    def __post_init__(self):
        if self.n_attributes < 1 or self.n_cases < 1 or self.n_communities < 1:
            raise ValueError("all counts must be >= 1")
        if self.n_communities > self.n_attributes:
            raise ValueError("n_communities exceeds n_attributes")
        if not (0.0 <= self.intra_community_bias <= 1.0):
            raise ValueError("intra_community_bias must lie in [0, 1]")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json_obj(self) -> dict:
        return {
            "n_attributes": self.n_attributes,
            "n_cases": self.n_cases,
            "n_communities": self.n_communities,
            "intra_community_bias": self.intra_community_bias,
            "seed": self.seed,
        }


def load_cases(path: str | Path) -> list[CaseRecord]:
    """Load a JSONL case file; raises CaseParseError with the offending line number."""
    records: list[CaseRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CaseParseError(f"bad JSON ({exc.msg})", lineno) from exc
            try:
                records.append(CaseRecord.from_raw(obj))
            except CaseParseError as exc:
                raise CaseParseError(exc.reason, lineno) from exc
    return records


def save_cases(cases: Iterable[CaseRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case.to_json_obj(), ensure_ascii=False) + "\n")


def filter_cases(cases: Sequence[CaseRecord], case_filter: CaseFilter) -> list[CaseRecord]:
    """Keep cases satisfying every present criterion, preserving order."""
    return [c for c in cases if case_filter.matches(c)]


def attribute_name(index: int, n_attributes: int) -> str:
    width = max(3, len(str(n_attributes - 1)))
    return f"attr_{index:0{width}d}"


def synthesize_cases(config: SynthConfig) -> list[CaseRecord]:
    """Generate a deterministic community-structured case corpus.

    Attributes are assigned round-robin to communities. Each case picks a
    community, draws 1-3 distinct inputs from it, and draws 1-3 distinct
    outputs: each output comes from the same community with probability
    ``intra_community_bias``, otherwise uniformly from all attributes.
    Within-community draws are rank-weighted (~1/sqrt(rank)) so a few
    attributes act as hubs, mirroring how a handful of PII attributes
    dominate real case corpora.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_attributes
    names = [attribute_name(i, n) for i in range(n)]
    communities: list[list[int]] = [[] for _ in range(config.n_communities)]
    for i in range(n):
        communities[i % config.n_communities].append(i)
    member_weights = []
    for members in communities:
        w = 1.0 / np.sqrt(1.0 + np.arange(len(members)))
        member_weights.append(w / w.sum())

    cases: list[CaseRecord] = []
    for case_idx in range(config.n_cases):
        com = int(rng.integers(config.n_communities))
        members = communities[com]
        weights = member_weights[com]

        k_in = min(int(rng.integers(1, 4)), len(members))
        inputs = [names[i] for i in rng.choice(members, size=k_in, replace=False, p=weights)]

        k_out = int(rng.integers(1, 4))
        outputs: list[str] = []
        chosen: set[str] = set()
        for _ in range(k_out):
            if rng.random() < config.intra_community_bias:
                pool = [names[i] for i in members]
                pool_w = weights
            else:
                pool = names
                pool_w = None
            pick = str(rng.choice(pool, p=pool_w))
            if pick not in chosen:
                chosen.add(pick)
                outputs.append(pick)

        cases.append(
            CaseRecord(
                case_id=f"case_{case_idx:06d}",
                inputs=tuple(inputs),
                outputs=tuple(outputs),
                loss_usd=round(float(rng.uniform(100.0, 50000.0)), 2),
                sector=SECTORS[int(rng.integers(len(SECTORS)))],
                victim_age=int(rng.integers(18, 91)),
            )
        )
    return cases

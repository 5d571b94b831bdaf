"""Semantic embeddings for PII attribute names.

An attribute like "employee credential" is expanded word by word into its
dictionary context ("a worker who is hired to perform a job a document
attesting to ...") and the context is encoded to a fixed-length vector.
Two providers exist: a deterministic hashed encoder (self-contained) and an
external file of precomputed vectors, e.g. from a transformer encoder.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .graph import EcosystemGraph


class EmbeddingError(ValueError):
    pass


class ExternalEmbeddingMiss(EmbeddingError):
    """An attribute is absent from the external embedding file."""


class DimensionMismatch(EmbeddingError):
    """External vectors do not have the configured dimension."""


class Lexicon:
    """Word -> definition map with defined misses (absent word is not an error)."""

    def __init__(self, entries: dict[str, str] | None = None):
        self._entries: dict[str, str] = {}
        for word, definition in (entries or {}).items():
            if not definition:
                raise ValueError(f"empty definition for {word!r}")
            self._entries[word.lower()] = definition

    def get(self, word: str) -> str | None:
        return self._entries.get(word.lower())

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "Lexicon":
        entries: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if "\t" not in line:
                    raise ValueError(f"lexicon line {lineno}: expected word<TAB>definition")
                word, definition = line.split("\t", 1)
                entries[word.strip()] = definition.strip()
        return cls(entries)

    @classmethod
    def builtin(cls) -> "Lexicon":
        """The small PII vocabulary shipped with the package."""
        data = resources.files("idrisk.data").joinpath("lexicon.tsv").read_text("utf-8")
        entries: dict[str, str] = {}
        for line in data.splitlines():
            if line.strip():
                word, definition = line.split("\t", 1)
                entries[word.strip()] = definition.strip()
        return cls(entries)


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    provider: str = "hashed"
    embedding_dim: int = 128
    max_token_len: int = 124
    external_path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.provider not in ("hashed", "external"):
            raise ValueError(f"unknown provider {self.provider!r}")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")
        if self.max_token_len < 1:
            raise ValueError("max_token_len must be >= 1")
        if self.provider == "external" and not self.external_path:
            raise ValueError("external provider requires external_path")

    def to_json_obj(self) -> dict:
        return {
            "provider": self.provider,
            "embedding_dim": self.embedding_dim,
            "max_token_len": self.max_token_len,
            "external_path": self.external_path,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SemanticEmbedding:
    attribute: str
    vector: np.ndarray


def contextualize(attribute: str, lex: Lexicon) -> str:
    """Word-by-word context: each word's definition, or the word itself on a miss."""
    parts = []
    for word in attribute.split(" "):
        definition = lex.get(word)
        parts.append(definition if definition is not None else word)
    return " ".join(parts)


def _token_vector(token: str, dim: int, seed: int) -> np.ndarray:
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little")
    ).digest()
    gen = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
    v = gen.standard_normal(dim)
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


class ExternalEmbeddings:
    """Precomputed attribute vectors: header `dim=<D>`, lines `attr<TAB>v1,...,vD`."""

    def __init__(self, dim: int, vectors: dict[str, np.ndarray]):
        self.dim = dim
        self.vectors = vectors

    @classmethod
    def load(cls, path: str | Path) -> "ExternalEmbeddings":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if not header.startswith("dim="):
                raise EmbeddingError("external embedding file must start with dim=<D>")
            try:
                dim = int(header[4:])
            except ValueError as exc:
                raise EmbeddingError(f"bad dimension header {header!r}") from exc
            vectors: dict[str, np.ndarray] = {}
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                if "\t" not in line:
                    raise EmbeddingError(f"line {lineno}: expected attribute<TAB>values")
                attr, values = line.rstrip("\n").split("\t", 1)
                vec = np.asarray([float(x) for x in values.split(",")], dtype=np.float64)
                if vec.shape[0] != dim:
                    raise DimensionMismatch(
                        f"line {lineno}: vector length {vec.shape[0]} != dim {dim}"
                    )
                vectors[attr] = vec
        return cls(dim, vectors)

    @staticmethod
    def save(path: str | Path, vectors: dict[str, np.ndarray]) -> None:
        dims = {v.shape[0] for v in vectors.values()}
        if len(dims) > 1:
            raise DimensionMismatch(f"inconsistent vector dimensions: {sorted(dims)}")
        dim = dims.pop() if dims else 0
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"dim={dim}\n")
            for attr in sorted(vectors):
                vals = ",".join(repr(float(x)) for x in vectors[attr])
                fh.write(f"{attr}\t{vals}\n")


def embed(
    context: str, config: EmbeddingProviderConfig, attribute: str = ""
) -> SemanticEmbedding:
    """Encode a context string to a fixed-length vector.

    hashed: whitespace tokens are truncated to max_token_len, each token maps
    to a seeded unit-norm pseudo-random vector, and the token mean is scaled
    back to unit L2 norm (an all-zero vector stays zero).
    external: the attribute's vector is read from the configured file.
    """
    if config.provider == "external":
        ext = ExternalEmbeddings.load(config.external_path)
        if ext.dim != config.embedding_dim:
            raise DimensionMismatch(
                f"external file dim {ext.dim} != configured {config.embedding_dim}"
            )
        if attribute not in ext.vectors:
            raise ExternalEmbeddingMiss(f"no external embedding for {attribute!r}")
        return SemanticEmbedding(attribute, ext.vectors[attribute])

    tokens = context.split()[: config.max_token_len]
    if not tokens:
        return SemanticEmbedding(attribute, np.zeros(config.embedding_dim))
    acc = np.zeros(config.embedding_dim)
    for token in tokens:
        acc += _token_vector(token, config.embedding_dim, config.seed)
    acc /= len(tokens)
    norm = np.linalg.norm(acc)
    if norm > 0:
        acc = acc / norm
    return SemanticEmbedding(attribute, acc)


def embed_all(
    g: EcosystemGraph, lex: Lexicon, config: EmbeddingProviderConfig
) -> dict[int, SemanticEmbedding]:
    """Contextualize and embed every node of the graph."""
    if config.provider == "external":
        ext = ExternalEmbeddings.load(config.external_path)
        if ext.dim != config.embedding_dim:
            raise DimensionMismatch(
                f"external file dim {ext.dim} != configured {config.embedding_dim}"
            )
        out: dict[int, SemanticEmbedding] = {}
        for i, name in enumerate(g.node_names):
            if name not in ext.vectors:
                raise ExternalEmbeddingMiss(f"no external embedding for {name!r}")
            out[i] = SemanticEmbedding(name, ext.vectors[name])
        return out
    return {
        i: embed(contextualize(name, lex), config, attribute=name)
        for i, name in enumerate(g.node_names)
    }


def embedding_matrix(sem: dict[int, SemanticEmbedding], n_nodes: int) -> np.ndarray:
    """Stack per-node embeddings into an [n_nodes x dim] matrix."""
    if len(sem) < n_nodes:
        missing = [i for i in range(n_nodes) if i not in sem]
        raise EmbeddingError(f"missing embeddings for nodes {missing[:5]}")
    dim = sem[0].vector.shape[0] if n_nodes else 0
    mat = np.zeros((n_nodes, dim))
    for i in range(n_nodes):
        vec = sem[i].vector
        if vec.shape[0] != dim:
            raise DimensionMismatch(f"node {i} embedding dim {vec.shape[0]} != {dim}")
        mat[i] = vec
    return mat

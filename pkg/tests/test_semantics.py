import numpy as np
import pytest

from idrisk.cases import SynthConfig, synthesize_cases
from idrisk.graph import build_graph
from idrisk.semantics import (
    DimensionMismatch,
    EmbeddingProviderConfig,
    ExternalEmbeddingMiss,
    ExternalEmbeddings,
    Lexicon,
    contextualize,
    embed,
    embed_all,
)

WORKED_LEXICON = Lexicon(
    {
        "employee": "a worker who is hired to perform a job",
        "credential": "a document attesting to the truth of certain stated facts",
    }
)


class TestContextualize:
    def test_worked_example(self):
        assert contextualize("employee credential", WORKED_LEXICON) == (
            "a worker who is hired to perform a job "
            "a document attesting to the truth of certain stated facts"
        )

    def test_miss_falls_back_to_word(self):
        assert contextualize("name", Lexicon()) == "name"

    def test_partial_miss(self):
        assert contextualize("employee name", WORKED_LEXICON) == (
            "a worker who is hired to perform a job name"
        )

    def test_every_synthetic_attribute_nonempty(self):
        cases = synthesize_cases(
            SynthConfig(n_attributes=30, n_cases=80, n_communities=5, intra_community_bias=0.8, seed=1)
        )
        g = build_graph(cases)
        lex = Lexicon.builtin()
        for name in g.node_names:
            assert contextualize(name, lex)

    def test_builtin_lexicon_loads(self):
        lex = Lexicon.builtin()
        assert len(lex) > 20
        assert "credential" in lex


class TestHashedEmbedding:
    CONFIG = EmbeddingProviderConfig(embedding_dim=64, seed=9)

    def test_deterministic(self):
        a = embed("some context words", self.CONFIG)
        b = embed("some context words", self.CONFIG)
        assert np.array_equal(a.vector, b.vector)

    def test_seed_changes_vector(self):
        other = EmbeddingProviderConfig(embedding_dim=64, seed=10)
        a = embed("some context words", self.CONFIG)
        b = embed("some context words", other)
        assert not np.allclose(a.vector, b.vector)

    def test_truncation_at_max_token_len(self):
        base_tokens = [f"tok{i}" for i in range(124)]
        a = embed(" ".join(base_tokens), self.CONFIG)
        b = embed(" ".join(base_tokens + ["junk1", "junk2", "junk3"]), self.CONFIG)
        assert np.array_equal(a.vector, b.vector)
        # below the horizon, extra tokens do change the embedding
        c = embed(" ".join(base_tokens[:100] + ["junk"]), self.CONFIG)
        assert not np.array_equal(a.vector, c.vector)

    def test_unit_norm(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n_tokens = int(rng.integers(1, 30))
            context = " ".join(f"w{int(rng.integers(100))}" for _ in range(n_tokens))
            v = embed(context, self.CONFIG).vector
            assert abs(np.linalg.norm(v) - 1.0) <= 1e-9

    def test_dimension(self):
        v = embed("hello world", EmbeddingProviderConfig(embedding_dim=17)).vector
        assert v.shape == (17,)

    def test_shared_tokens_raise_expected_cosine(self):
        # contexts sharing k of m tokens: mean cosine grows with k
        config = EmbeddingProviderConfig(embedding_dim=64, seed=0)
        m = 8
        trials = 120
        means = []
        for k in range(m + 1):
            sims = []
            for t in range(trials):
                shared = [f"s{t}_{i}" for i in range(k)]
                a = shared + [f"a{t}_{i}" for i in range(m - k)]
                b = shared + [f"b{t}_{i}" for i in range(m - k)]
                va = embed(" ".join(a), config).vector
                vb = embed(" ".join(b), config).vector
                sims.append(float(va @ vb))
            means.append(np.mean(sims))
        for k in range(m):
            assert means[k + 1] > means[k] - 0.02
        assert means[m] == pytest.approx(1.0, abs=1e-9)


class TestExternalEmbeddings:
    def write_file(self, path, dim, vectors):
        ExternalEmbeddings.save(path, vectors)
        return path

    def test_round_trip(self, tmp_path, three_case_graph):
        rng = np.random.default_rng(0)
        vectors = {name: rng.normal(size=16) for name in three_case_graph.node_names}
        path = tmp_path / "emb.tsv"
        ExternalEmbeddings.save(path, vectors)
        config = EmbeddingProviderConfig(provider="external", embedding_dim=16, external_path=str(path))
        sem = embed_all(three_case_graph, Lexicon(), config)
        assert len(sem) == 7
        for i, name in enumerate(three_case_graph.node_names):
            assert np.allclose(sem[i].vector, vectors[name])

    def test_missing_attribute(self, tmp_path, three_case_graph):
        path = tmp_path / "emb.tsv"
        ExternalEmbeddings.save(path, {"name": np.zeros(4)})
        config = EmbeddingProviderConfig(provider="external", embedding_dim=4, external_path=str(path))
        with pytest.raises(ExternalEmbeddingMiss):
            embed_all(three_case_graph, Lexicon(), config)

    def test_dimension_mismatch(self, tmp_path):
        path = tmp_path / "emb.tsv"
        ExternalEmbeddings.save(path, {"name": np.zeros(4)})
        config = EmbeddingProviderConfig(provider="external", embedding_dim=8, external_path=str(path))
        with pytest.raises(DimensionMismatch):
            embed("ignored", config, attribute="name")

    def test_header_required(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("name\t1,2,3\n")
        with pytest.raises(ValueError):
            ExternalEmbeddings.load(path)

    def test_external_requires_path(self):
        with pytest.raises(ValueError):
            EmbeddingProviderConfig(provider="external")


class TestEmbedAll:
    def test_three_case_coverage(self, three_case_graph):
        config = EmbeddingProviderConfig(embedding_dim=32)
        sem = embed_all(three_case_graph, Lexicon.builtin(), config)
        assert set(sem) == set(range(7))
        assert all(s.vector.shape == (32,) for s in sem.values())

    def test_identical_contexts_identical_vectors(self):
        from idrisk.graph import EcosystemGraph

        g = EcosystemGraph.from_edges(["alpha", "beta"], [(0, 1, 1)])
        lex = Lexicon({"alpha": "shared definition", "beta": "shared definition"})
        sem = embed_all(g, lex, EmbeddingProviderConfig(embedding_dim=16))
        assert np.array_equal(sem[0].vector, sem[1].vector)

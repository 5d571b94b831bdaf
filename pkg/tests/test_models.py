import math

import numpy as np
import pytest

from idrisk.cases import SynthConfig, synthesize_cases
from idrisk.graph import EcosystemGraph, build_graph
from idrisk.metrics import feature_table, standardize
from idrisk.models import (
    ModelConfig,
    accuracy_from_scores,
    auc_from_scores,
    evaluate,
    forward_pairs,
    init_params,
    message_graph,
    random_link_split,
    sample_negatives,
    score_featureGCN,
    score_featureMLP,
    score_seeGCN,
    train,
)
from idrisk.semantics import EmbeddingProviderConfig, Lexicon, embed_all

from oracles import central_difference, random_graph, relative_error


def small_corpus(seed=3, n_attr=60, n_cases=400, k=6):
    cfg = SynthConfig(
        n_attributes=n_attr,
        n_cases=n_cases,
        n_communities=k,
        intra_community_bias=0.9,
        seed=seed,
    )
    return build_graph(synthesize_cases(cfg))


def zeroed(store):
    for _, t in store.items():
        t.data = np.zeros_like(t.data)
    return store


class TestRandomLinkSplit:
    def hundred_edge_graph(self):
        rng = np.random.default_rng(0)
        edges = set()
        while len(edges) < 100:
            u, v = int(rng.integers(30)), int(rng.integers(30))
            if u != v:
                edges.add((u, v))
        return EcosystemGraph.from_edges(
            [f"n{i}" for i in range(30)], [(u, v, 1) for u, v in edges]
        )

    def test_partition_arithmetic(self):
        g = self.hundred_edge_graph()
        split = random_link_split(g, seed=5)
        assert len(split.train_supervision_pos) == 90
        assert len(split.val_pos) == 10
        assert len(split.train_neg) == 90
        assert len(split.val_neg) == 10
        train_set = set(split.train_supervision_pos)
        val_set = set(split.val_pos)
        assert not (train_set & val_set)
        assert train_set | val_set == g.edge_set()
        assert not (set(split.train_neg) & set(split.val_neg))
        assert split.train_message_edges == split.train_supervision_pos

    def test_deterministic(self):
        g = self.hundred_edge_graph()
        a = random_link_split(g, seed=9)
        b = random_link_split(g, seed=9)
        assert a.val_pos == b.val_pos
        assert a.train_neg == b.train_neg
        assert a.val_neg == b.val_neg

    def test_negatives_absent_from_edge_set(self):
        g = self.hundred_edge_graph()
        split = random_link_split(g, seed=1)
        edges = g.edge_set()
        for u, v in split.train_neg + split.val_neg:
            assert u != v
            assert (u, v) not in edges  # brute-force membership scan

    def test_too_few_edges(self):
        g = EcosystemGraph.from_edges(["a", "b", "c"], [(0, 1, 1), (1, 2, 1)])
        with pytest.raises(ValueError):
            random_link_split(g)

    def test_too_dense(self):
        n = 6
        edges = [(u, v, 1) for u in range(n) for v in range(n) if u != v]
        g = EcosystemGraph.from_edges([f"n{i}" for i in range(n)], edges)
        with pytest.raises(ValueError):
            random_link_split(g)

    def test_sample_negatives_dense_regime_exact(self):
        rng = np.random.default_rng(2)
        forbidden = {(0, 1), (1, 0)}
        got = sample_negatives(3, 4, forbidden, rng)
        assert sorted(got) == [(0, 2), (1, 2), (2, 0), (2, 1)]


class TestScoreFunctions:
    def setup_small(self):
        g = small_corpus(n_attr=20, n_cases=120, k=4)
        table = feature_table(g)
        feats, _ = standardize(table)
        return g, feats

    def test_zero_mlp_scores_half(self):
        g, feats = self.setup_small()
        store = zeroed(init_params(ModelConfig(kind="featuremlp", seed=0)))
        pairs = [(0, 1), (1, 2), (5, 9)]
        scores = score_featureMLP(store, feats, pairs)
        assert all(s.p == pytest.approx(0.5) for s in scores)

    def test_zero_gcn_scores_half(self):
        g, feats = self.setup_small()
        store = zeroed(init_params(ModelConfig(kind="featuregcn", seed=0)))
        scores = score_featureGCN(store, feats, g, [(0, 1), (3, 4)])
        assert all(s.p == pytest.approx(0.5) for s in scores)

    def test_batch_equals_per_pair(self):
        g, feats = self.setup_small()
        store = init_params(ModelConfig(kind="featuremlp", seed=4))
        pairs = [(0, 1), (2, 3), (7, 11), (11, 7)]
        batch = score_featureMLP(store, feats, pairs)
        singles = [score_featureMLP(store, feats, [p])[0] for p in pairs]
        for b, s in zip(batch, singles):
            assert b.p == pytest.approx(s.p, abs=1e-12)

    def test_unknown_node_id(self):
        g, feats = self.setup_small()
        store = init_params(ModelConfig(kind="featuremlp", seed=0))
        with pytest.raises(KeyError):
            score_featureMLP(store, feats, [(0, 10_000)])

    def test_gcn_permutation_consistency(self):
        rng = np.random.default_rng(6)
        g = random_graph(rng, n_min=8, n_max=8, p=0.4)
        feats, _ = standardize(feature_table(g))
        store = init_params(ModelConfig(kind="featuregcn", seed=1, hidden_dim=8))
        pairs = [(0, 1), (2, 5), (7, 3)]
        base = score_featureGCN(store, feats, g, pairs)

        perm = rng.permutation(g.n_nodes)
        inv = np.argsort(perm)
        permuted = EcosystemGraph.from_edges(
            [g.node_name(int(i)) for i in perm],
            [(int(inv[u]), int(inv[v]), w) for u, v, w in g.edges()],
        )
        feats_p = feats[perm]
        pairs_p = [(int(inv[u]), int(inv[v])) for u, v in pairs]
        scores_p = score_featureGCN(store, feats_p, permuted, pairs_p)
        for a, b in zip(base, scores_p):
            assert a.p == pytest.approx(b.p, abs=1e-12)

    def test_seegcn_zero_branch_reduces_to_featuregcn(self):
        g, feats = self.setup_small()
        sem = embed_all(g, Lexicon.builtin(), EmbeddingProviderConfig(embedding_dim=16))
        config = ModelConfig(kind="featuregcn", seed=8, hidden_dim=8)
        gcn = init_params(config)
        see = init_params(ModelConfig(kind="seegcn", seed=8, hidden_dim=8), emb_dim=16)
        # copy the structural branch, zero the semantic branch, and embed the
        # gcn head into the A1 half of the see head
        for name in ("gcn.sage1.W_self", "gcn.sage1.W_neigh", "gcn.sage1.bias",
                     "gcn.sage2.W_self", "gcn.sage2.W_neigh", "gcn.sage2.bias"):
            see[name].data = gcn[name].data.copy()
        see["see.fc.W"].data = np.zeros_like(see["see.fc.W"].data)
        see["see.fc.b"].data = np.zeros_like(see["see.fc.b"].data)
        head = np.zeros_like(see["see.head.W"].data)
        gcn["gcn.head.W"].data = np.random.default_rng(0).normal(size=gcn["gcn.head.W"].data.shape)
        gcn["gcn.head.b"].data = np.array([0.25])
        head[:8] = gcn["gcn.head.W"].data
        see["see.head.W"].data = head
        see["see.head.b"].data = gcn["gcn.head.b"].data.copy()

        pairs = [(0, 1), (4, 9), (12, 3)]
        a = score_featureGCN(gcn, feats, g, pairs)
        b = score_seeGCN(see, feats, sem, g, pairs)
        for x, y in zip(a, b):
            assert x.p == pytest.approx(y.p, abs=1e-12)

    def test_directedness_witness_mlp(self):
        g = small_corpus(n_attr=30, n_cases=200, k=5)
        split = random_link_split(g, seed=2)
        store, _ = train(g, ModelConfig(kind="featuremlp", seed=3, epochs=10), split)
        feats, _ = standardize(feature_table(g))
        rng = np.random.default_rng(0)
        diffs = []
        for _ in range(20):
            u, v = rng.integers(g.n_nodes, size=2)
            if u == v:
                continue
            fwd = score_featureMLP(store, feats, [(int(u), int(v))])[0].p
            bwd = score_featureMLP(store, feats, [(int(v), int(u))])[0].p
            diffs.append(abs(fwd - bwd))
        assert np.mean([d > 1e-9 for d in diffs]) > 0.7

    def test_seegcn_direction_sensitivity(self):
        g = small_corpus(n_attr=30, n_cases=200, k=5)
        sem = embed_all(g, Lexicon.builtin(), EmbeddingProviderConfig(embedding_dim=16))
        split = random_link_split(g, seed=2)
        store, _ = train(
            g, ModelConfig(kind="seegcn", seed=3, epochs=10, hidden_dim=16), split, sem=sem
        )
        feats, _ = standardize(feature_table(g))
        # swapping the endpoint semantic vectors changes the score
        swapped = {i: sem[i] for i in sem}
        changed = 0
        for u, v in [(0, 5), (7, 2), (11, 20)]:
            base = score_seeGCN(store, feats, sem, g, [(u, v)])[0].p
            rev = score_seeGCN(store, feats, sem, g, [(v, u)])[0].p
            if abs(base - rev) > 1e-9:
                changed += 1
        assert changed >= 2


class TestFullModelGradients:
    def test_all_kinds(self):
        rng = np.random.default_rng(12)
        g = random_graph(rng, n_min=8, n_max=8, p=0.35)
        feats, _ = standardize(feature_table(g))
        sem_matrix = rng.normal(size=(g.n_nodes, 8))
        pairs = [(0, 1), (2, 5), (7, 3), (4, 4)]
        labels = np.array([[1.0], [0.0], [1.0], [0.0]])
        configs = {
            "featuremlp": ModelConfig(kind="featuremlp", seed=2, mlp_hidden=(8, 4)),
            "featuregcn": ModelConfig(kind="featuregcn", seed=2, hidden_dim=8),
            "seegcn": ModelConfig(kind="seegcn", seed=2, hidden_dim=8),
        }
        for kind, config in configs.items():
            store = init_params(config, emb_dim=8)
            # non-zero head so gradients flow everywhere
            for name, t in store.items():
                if ".head." in name and name.endswith(".W"):
                    t.data = rng.normal(size=t.data.shape) * 0.5

            def loss_tensor():
                from idrisk.autodiff import bce_loss

                pred = forward_pairs(kind, store, feats, pairs, g, sem_matrix)
                return bce_loss(pred, labels)

            loss = loss_tensor()
            loss.backward()
            for name, t in store.items():
                analytic = t.grad.copy() if t.grad is not None else np.zeros_like(t.data)
                numeric = central_difference(lambda: float(loss_tensor().data), t.data)
                assert relative_error(analytic, numeric) <= 1e-4, (kind, name)


class TestTrainEvaluate:
    def test_epoch_one_loss_is_ln2(self):
        g = small_corpus()
        split = random_link_split(g, seed=4)
        _, report = train(g, ModelConfig(kind="featuremlp", seed=0, epochs=1), split)
        assert report.train_loss[0] == pytest.approx(math.log(2.0), abs=1e-9)

    def test_best_accuracy_is_max(self):
        g = small_corpus()
        split = random_link_split(g, seed=4)
        _, report = train(g, ModelConfig(kind="featuregcn", seed=0, epochs=8), split)
        assert report.best_val_accuracy == max(report.val_accuracy)
        assert report.val_accuracy[report.best_epoch - 1] == report.best_val_accuracy

    def test_deterministic_reports(self):
        g = small_corpus()
        split = random_link_split(g, seed=4)
        _, r1 = train(g, ModelConfig(kind="featuregcn", seed=5, epochs=6), split)
        _, r2 = train(g, ModelConfig(kind="featuregcn", seed=5, epochs=6), split)
        assert r1.to_json_obj() == r2.to_json_obj()

    def test_losses_finite_and_scores_in_range(self):
        g = small_corpus()
        split = random_link_split(g, seed=4)
        store, report = train(g, ModelConfig(kind="featuregcn", seed=1, epochs=12), split)
        assert all(np.isfinite(x) for x in report.train_loss)
        feats, _ = standardize(feature_table(g))
        g_msg = message_graph(g, split)
        scores = score_featureGCN(store, feats, g_msg, split.val_pos + split.val_neg)
        assert all(0.0 < s.p < 1.0 for s in scores)

    def test_seegcn_requires_embeddings(self):
        g = small_corpus()
        split = random_link_split(g, seed=4)
        with pytest.raises(ValueError):
            train(g, ModelConfig(kind="seegcn", seed=0, epochs=1), split)

    def test_report_round_trip(self):
        g = small_corpus()
        split = random_link_split(g, seed=4)
        _, report = train(g, ModelConfig(kind="featuremlp", seed=0, epochs=3), split)
        from idrisk.models import TrainReport

        assert TrainReport.from_json_obj(report.to_json_obj()) == report


class TestAccuracyHelpers:
    def test_oracle_scorer_accuracy_one(self):
        assert accuracy_from_scores(np.ones(10), np.zeros(10)) == 1.0

    def test_constant_half_scorer(self):
        # 0.5 is not > 0.5, so positives are wrong; negatives (<= 0.5) are right
        assert accuracy_from_scores(np.full(10, 0.5), np.full(10, 0.5)) == 0.5

    def test_matches_confusion_matrix_recount(self):
        rng = np.random.default_rng(1)
        pos = rng.uniform(size=50)
        neg = rng.uniform(size=50)
        tp = sum(1 for p in pos if p > 0.5)
        tn = sum(1 for p in neg if p <= 0.5)
        assert accuracy_from_scores(pos, neg) == (tp + tn) / 100

    def test_auc_perfect_and_reverse(self):
        assert auc_from_scores(np.array([0.9, 0.8]), np.array([0.1, 0.2])) == 1.0
        assert auc_from_scores(np.array([0.1, 0.2]), np.array([0.9, 0.8])) == 0.0
        assert auc_from_scores(np.array([0.5]), np.array([0.5])) == 0.5

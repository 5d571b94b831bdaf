"""Acceptance suite: one test per release criterion, each printing a
[PASS]/[FAIL] line (run with `pytest tests/test_acceptance.py -v -s`).

Tolerances are fixed here and must not be loosened.
"""

import json
import math
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from idrisk.autodiff import Tensor, add, bce_loss, concat, gather_rows, matmul, mul, relu, sigmoid
from idrisk.cases import SynthConfig, synthesize_cases
from idrisk.cli import main as cli_main
from idrisk.graph import EcosystemGraph, build_graph, disclosure_probabilities
from idrisk.metrics import betweenness, closeness, feature_table, pagerank, standardize
from idrisk.models import (
    ModelConfig,
    forward_pairs,
    init_params,
    random_link_split,
    score_featureGCN,
    train,
)
from idrisk.nnet import DenseLayer, SageConvLayer, dense, sage_conv
from idrisk.risk import RiskQuery, assess
from idrisk.semantics import EmbeddingProviderConfig, Lexicon, embed_all
from idrisk.service import create_app
from idrisk.workspace import Workspace

from oracles import (
    THREE_CASE_EDGE_WEIGHTS,
    bfs_closeness,
    brute_betweenness,
    central_difference,
    dense_pagerank,
    random_graph,
    relative_error,
    three_case_records,
)


def _emit(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" — {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_graph_construction_fidelity():
    g = build_graph(three_case_records())
    by_name = {(g.node_name(u), g.node_name(v)): w for u, v, w in g.edges()}
    ok = g.n_nodes == 7 and g.n_edges == 11 and by_name == THREE_CASE_EDGE_WEIGHTS
    _emit(
        "graph construction fidelity",
        ok,
        f"nodes={g.n_nodes} edges={g.n_edges} weights={sorted(by_name.values(), reverse=True)}",
    )


def test_disclosure_probability():
    g = EcosystemGraph.from_edges(["name", "bank account", "birth date"], [(0, 1, 3), (0, 2, 7)])
    probs = {d.target: d.p for d in disclosure_probabilities(g, 0)}
    err = max(abs(probs[1] - 0.3), abs(probs[2] - 0.7))
    _emit("disclosure probability (3/(3+7) example)", err <= 1e-12, f"max abs err {err:.2e}")


def test_centrality_oracles():
    rng = np.random.default_rng(2024)
    start = time.monotonic()
    max_bc_err = 0.0
    max_cl_err = 0.0
    for _ in range(200):
        g = random_graph(rng, n_min=2, n_max=12, p=float(rng.uniform(0.1, 0.5)))
        max_bc_err = max(max_bc_err, float(np.max(np.abs(betweenness(g) - brute_betweenness(g)))))
        max_cl_err = max(max_cl_err, float(np.max(np.abs(closeness(g) - bfs_closeness(g)))))
    elapsed = time.monotonic() - start
    ok = max_bc_err <= 1e-9 and max_cl_err <= 1e-9 and elapsed < 60.0
    _emit(
        "centrality oracles (200 graphs <= 12 nodes)",
        ok,
        f"betweenness err {max_bc_err:.2e}, closeness err {max_cl_err:.2e}, {elapsed:.1f}s",
    )


def test_pagerank():
    # symmetric cycle: exact uniformity
    n = 12
    edges = []
    for i in range(n):
        edges.append((i, (i + 1) % n, 1))
        edges.append(((i + 1) % n, i, 1))
    cycle = EcosystemGraph.from_edges([f"n{i}" for i in range(n)], edges)
    cycle_err = float(np.max(np.abs(pagerank(cycle) - 1.0 / n)))

    # random graphs, up to 1000 nodes, vs the dense oracle
    rng = np.random.default_rng(7)
    worst_oracle = 0.0
    worst_sum = 0.0
    graphs = [random_graph(rng, n_min=5, n_max=60, p=0.15) for _ in range(8)]
    big = build_graph(
        synthesize_cases(
            SynthConfig(n_attributes=1000, n_cases=3000, n_communities=25, intra_community_bias=0.8, seed=5)
        )
    )
    assert big.n_nodes >= 900
    graphs.append(big)
    for g in graphs:
        for reverse in (False, True):
            got = pagerank(g, reverse=reverse)
            want = dense_pagerank(g, reverse=reverse)
            worst_oracle = max(worst_oracle, float(np.max(np.abs(got - want))))
            worst_sum = max(worst_sum, abs(float(got.sum()) - 1.0))
    ok = cycle_err <= 1e-10 and worst_oracle <= 1e-8 and worst_sum <= 1e-9
    _emit(
        "pagerank (sums, dense oracle, cycle uniformity)",
        ok,
        f"cycle {cycle_err:.2e}, oracle Linf {worst_oracle:.2e}, sum err {worst_sum:.2e}, "
        f"largest graph {graphs[-1].n_nodes} nodes",
    )


def _grad_check(build_loss, tensors, h=1e-5, tol=1e-4):
    loss = build_loss()
    loss.backward()
    worst = 0.0
    for t in tensors:
        analytic = t.grad.copy() if t.grad is not None else np.zeros_like(t.data)
        numeric = central_difference(lambda: float(build_loss().data), t.data, h=h)
        worst = max(worst, relative_error(analytic, numeric))
    return worst


def test_differentiation():
    rng = np.random.default_rng(321)
    worst = {}

    # individual layers, 20 seeded configurations each
    for name in ("dense", "relu", "sigmoid", "concat", "hadamard", "bce"):
        w = 0.0
        for _ in range(20):
            n, d = int(rng.integers(2, 6)), int(rng.integers(2, 5))
            x = Tensor(rng.normal(size=(n, d)), requires_grad=True)
            y = Tensor(rng.normal(size=(n, d)), requires_grad=True)
            labels = rng.integers(0, 2, size=(n, d)).astype(float)
            if name == "dense":
                layer = DenseLayer(
                    Tensor(rng.normal(size=(d, 3)), requires_grad=True),
                    Tensor(rng.normal(size=3), requires_grad=True),
                )
                lab = rng.integers(0, 2, size=(n, 3)).astype(float)
                build = lambda: bce_loss(sigmoid(dense(layer, x)), lab)
                tensors = [layer.W, layer.b, x]
            elif name == "relu":
                build = lambda: bce_loss(sigmoid(relu(x)), labels)
                tensors = [x]
            elif name == "sigmoid":
                build = lambda: bce_loss(sigmoid(x), labels)
                tensors = [x]
            elif name == "concat":
                lab2 = rng.integers(0, 2, size=(n, 2 * d)).astype(float)
                build = lambda: bce_loss(sigmoid(concat(x, y)), lab2)
                tensors = [x, y]
            elif name == "hadamard":
                build = lambda: bce_loss(sigmoid(mul(x, y)), labels)
                tensors = [x, y]
            else:  # bce on raw probabilities
                p = Tensor(rng.uniform(0.05, 0.95, size=(n, 1)), requires_grad=True)
                lab = rng.integers(0, 2, size=(n, 1)).astype(float)
                build = lambda: bce_loss(p, lab)
                tensors = [p]
            w = max(w, _grad_check(build, tensors))
        worst[name] = w

    # sage_conv layer over random graphs
    w = 0.0
    for _ in range(20):
        g = random_graph(rng, n_min=4, n_max=8, p=0.35)
        d_in, d_out = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        layer = SageConvLayer(
            Tensor(rng.normal(size=(d_in, d_out)), requires_grad=True),
            Tensor(rng.normal(size=(d_in, d_out)), requires_grad=True),
            Tensor(rng.normal(size=d_out), requires_grad=True),
        )
        x = Tensor(rng.normal(size=(g.n_nodes, d_in)), requires_grad=True)
        lab = rng.integers(0, 2, size=(g.n_nodes, d_out)).astype(float)
        build = lambda: bce_loss(sigmoid(sage_conv(layer, x, g)), lab)
        w = max(w, _grad_check(build, [layer.W_self, layer.W_neigh, layer.bias, x]))
    worst["sage_conv"] = w

    # the three full models, 20 seeded configurations each
    for kind in ("featuremlp", "featuregcn", "seegcn"):
        w = 0.0
        for trial in range(20):
            g = random_graph(rng, n_min=6, n_max=9, p=0.35)
            feats, _ = standardize(feature_table(g))
            sem_matrix = rng.normal(size=(g.n_nodes, 6))
            idx = rng.integers(0, g.n_nodes, size=(4, 2))
            pairs = [(int(u), int(v)) for u, v in idx]
            labels = rng.integers(0, 2, size=(4, 1)).astype(float)
            config = (
                ModelConfig(kind=kind, seed=trial, mlp_hidden=(6, 4))
                if kind == "featuremlp"
                else ModelConfig(kind=kind, seed=trial, hidden_dim=6)
            )
            store = init_params(config, emb_dim=6)
            for name, t in store.items():
                if ".head.W" in name:
                    t.data = rng.normal(size=t.data.shape) * 0.4

            def build():
                return bce_loss(forward_pairs(kind, store, feats, pairs, g, sem_matrix), labels)

            w = max(w, _grad_check(build, [t for _, t in store.items()]))
        worst[kind] = w

    overall = max(worst.values())
    _emit(
        "differentiation (finite differences, h=1e-5)",
        overall <= 1e-4,
        "worst rel err " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()),
    )


ACCEPTANCE_CORPUS = SynthConfig(
    n_attributes=300, n_cases=2000, n_communities=15, intra_community_bias=0.9, seed=42
)


def test_training_signal():
    start = time.monotonic()
    g = build_graph(synthesize_cases(ACCEPTANCE_CORPUS))
    split = random_link_split(g, ratio=0.9, seed=7)
    sem = embed_all(g, Lexicon.builtin(), EmbeddingProviderConfig())
    accs = {}
    for kind in ("featuremlp", "featuregcn", "seegcn"):
        config = ModelConfig(kind=kind, epochs=50, lr=0.01, seed=1)
        _, report = train(g, config, split, sem=sem if kind == "seegcn" else None)
        accs[kind] = report.best_val_accuracy
    elapsed = time.monotonic() - start
    ok = (
        accs["featuregcn"] >= 0.75
        and accs["seegcn"] >= 0.75
        and accs["featuremlp"] >= 0.60
        and accs["featuregcn"] >= accs["featuremlp"]
        and accs["seegcn"] >= accs["featuremlp"]
        and elapsed <= 600.0
    )
    _emit(
        "training signal (300 attrs, 2000 cases, bias 0.9, 50 epochs, lr 0.01)",
        ok,
        f"mlp={accs['featuremlp']:.4f} gcn={accs['featuregcn']:.4f} "
        f"see={accs['seegcn']:.4f}, {elapsed:.0f}s",
    )


def _end_to_end(root) -> tuple[bytes, bytes]:
    ws = Workspace(root)
    cases = synthesize_cases(
        SynthConfig(n_attributes=60, n_cases=400, n_communities=6, intra_community_bias=0.9, seed=9)
    )
    ws.store_cases(cases, source="synthetic")
    ws.build()
    ws.compute_embeddings(EmbeddingProviderConfig(embedding_dim=32))
    report = ws.train(ModelConfig(kind="seegcn", epochs=8, seed=4), split_seed=2)
    train_bytes = json.dumps(report.to_json_obj(), sort_keys=True).encode()
    risk_report = ws.assess(
        RiskQuery(lost_attributes=("attr_000", "attr_011"), threshold=10.0, model_kind="seegcn")
    )
    return train_bytes, risk_report.to_json_bytes()


def test_determinism(tmp_path):
    t1, r1 = _end_to_end(tmp_path / "run1")
    t2, r2 = _end_to_end(tmp_path / "run2")
    ok = t1 == t2 and r1 == r2
    _emit("determinism (two identical end-to-end runs)", ok,
          f"train reports equal={t1 == t2}, risk reports equal={r1 == r2}")


def test_risk_pipeline():
    cfg = SynthConfig(n_attributes=30, n_cases=250, n_communities=5, intra_community_bias=0.9, seed=77)
    g = build_graph(synthesize_cases(cfg))
    assert g.n_nodes == 30
    split = random_link_split(g, seed=3)
    store, _ = train(g, ModelConfig(kind="featuregcn", seed=5, epochs=15), split)
    table = feature_table(g)
    lost = (g.node_name(0), g.node_name(7))
    report = assess(
        RiskQuery(lost_attributes=lost, threshold=0.0, model_kind="featuregcn"),
        g, table, store,
    )

    # brute-force recomputation of every formula
    feats, _ = standardize(table)
    lost_ids = [g.node_id(x) for x in lost]
    raw = {}
    for node in range(g.n_nodes):
        if node in lost_ids:
            continue
        p = max(score_featureGCN(store, feats, g, [(a, node)])[0].p for a in lost_ids)
        s = float(table.pagerank[node] + table.reverse_pagerank[node])
        raw[g.node_name(node)] = (p, s, p * s)
    max_raw = max(v[2] for v in raw.values())
    worst = 0.0
    for c in report.candidates:
        p, s, rs_raw = raw[c.attribute]
        worst = max(
            worst,
            abs(c.p - p),
            abs(c.s - s),
            abs(c.rs_raw - rs_raw),
            abs(c.rs - rs_raw / max_raw * 100.0),
        )
    ok = (
        worst <= 1e-9
        and len(report.candidates) == g.n_nodes - len(lost)
        and report.candidates[0].rs == 100.0
    )
    _emit(
        "risk pipeline (30-node fixture, brute-force recomputation)",
        ok,
        f"max abs err {worst:.2e}, candidates {len(report.candidates)}/{g.n_nodes - len(lost)}, "
        f"top score {report.candidates[0].rs}",
    )


def test_service_parity(tmp_path):
    root = tmp_path / "parity_ws"
    ws = Workspace(root)
    cases = synthesize_cases(
        SynthConfig(n_attributes=40, n_cases=300, n_communities=5, intra_community_bias=0.9, seed=21)
    )
    ws.store_cases(cases, source="synthetic")
    g = ws.build()
    ws.train(ModelConfig(kind="featuregcn", seed=2, epochs=5), split_seed=1)

    client = TestClient(create_app(root))
    runner = CliRunner()
    rng = np.random.default_rng(100)
    names = g.node_names
    mismatches = 0
    for i in range(20):
        k = int(rng.integers(1, 4))
        lost = [names[int(j)] for j in rng.choice(len(names), size=k, replace=False)]
        threshold = float(rng.choice([0.0, 25.0, 50.0, 75.0, 100.0, round(float(rng.uniform(0, 100)), 2)]))
        out = tmp_path / f"cli_{i}.json"
        result = runner.invoke(
            cli_main,
            [
                "--workspace", str(root),
                "assess", "--lost", ",".join(lost),
                "--threshold", str(threshold), "--model", "featuregcn",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        http = client.post(
            "/api/assess",
            json={"lost": lost, "threshold": threshold, "model": "featuregcn"},
        )
        if out.read_bytes() != http.content:
            mismatches += 1
    _emit(
        "service parity (20 randomized queries, CLI vs HTTP)",
        mismatches == 0,
        f"{20 - mismatches}/20 byte-identical",
    )

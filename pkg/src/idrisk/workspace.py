"""On-disk workspace: one directory holding the active graph and artifacts.

Layout under the workspace root:

    cases.jsonl              ingested or synthesized case records
    graph.json               the active ecosystem graph
    features.json            cached node metrics (keyed by graph hash)
    embeddings.json          semantic embeddings (keyed by graph hash)
    checkpoints/<hash>_<kind>.ckpt
    train_reports/<hash>_<kind>.json
    reports/                 assessment outputs
    workspace.json           provenance: sources, hashes, seeds, configs

Checkpoints record the hash of the graph they were trained on; assessment
refuses a checkpoint whose hash does not match the active graph.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import metrics, models, risk, semantics
from .cases import CaseFilter, CaseRecord, SynthConfig, load_cases, save_cases
from .graph import EcosystemGraph, build_graph, load_graph, save_graph
from .nnet import ParamStore, load_checkpoint, save_checkpoint


class WorkspaceError(RuntimeError):
    """Missing or inconsistent workspace state."""


class GraphCheckpointMismatch(WorkspaceError):
    """The checkpoint was trained on a different graph than the active one."""


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.cases_path = self.root / "cases.jsonl"
        self.graph_path = self.root / "graph.json"
        self.features_path = self.root / "features.json"
        self.embeddings_path = self.root / "embeddings.json"
        self.state_path = self.root / "workspace.json"
        self.checkpoints_dir = self.root / "checkpoints"
        self.train_reports_dir = self.root / "train_reports"
        self.reports_dir = self.root / "reports"
        self._graph: EcosystemGraph | None = None
        self._table: metrics.NodeFeatureTable | None = None

    def ensure_dirs(self) -> None:
        for d in (self.root, self.checkpoints_dir, self.train_reports_dir, self.reports_dir):
            d.mkdir(parents=True, exist_ok=True)

    # -- provenance ----------------------------------------------------------

    def state(self) -> dict:
        if self.state_path.exists():
            return json.loads(self.state_path.read_text(encoding="utf-8"))
        return {}

    def _update_state(self, **kwargs) -> None:
        state = self.state()
        state.update(kwargs)
        self.ensure_dirs()
        self.state_path.write_text(
            json.dumps(state, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    # -- cases ---------------------------------------------------------------

    def store_cases(
        self,
        cases: list[CaseRecord],
        source: str,
        synth_config: SynthConfig | None = None,
    ) -> None:
        self.ensure_dirs()
        save_cases(cases, self.cases_path)
        self._update_state(
            case_source=source,
            case_sha256=_sha256(self.cases_path),
            n_cases=len(cases),
            synth=synth_config.to_json_obj() if synth_config else None,
        )

    def load_cases(self) -> list[CaseRecord]:
        if not self.cases_path.exists():
            raise WorkspaceError("no cases in workspace; run `ingest` or `synth` first")
        return load_cases(self.cases_path)

    # -- graph ---------------------------------------------------------------

    def build(self, case_filter: CaseFilter | None = None) -> EcosystemGraph:
        cases = self.load_cases()
        if case_filter is not None and not case_filter.is_empty():
            from .cases import filter_cases

            cases = filter_cases(cases, case_filter)
            if not cases:
                raise WorkspaceError("filter removed every case; nothing to build")
        g = build_graph(cases)
        save_graph(g, self.graph_path)
        self._graph = g
        self._table = None
        self._update_state(
            graph_hash=self.graph_hash(),
            graph_label=g.label(),
            filter=case_filter.to_json_obj() if case_filter else None,
        )
        return g

    def graph(self) -> EcosystemGraph:
        if self._graph is None:
            if not self.graph_path.exists():
                raise WorkspaceError("no graph in workspace; run `build` first")
            self._graph = load_graph(self.graph_path)
        return self._graph

    def graph_hash(self) -> str:
        if not self.graph_path.exists():
            raise WorkspaceError("no graph in workspace; run `build` first")
        return _sha256(self.graph_path)

    # -- metrics -------------------------------------------------------------

    def feature_table(self) -> metrics.NodeFeatureTable:
        if self._table is not None:
            return self._table
        g_hash = self.graph_hash()
        if self.features_path.exists():
            obj = json.loads(self.features_path.read_text(encoding="utf-8"))
            if obj.get("graph_hash") == g_hash:
                self._table = metrics.NodeFeatureTable.from_json_obj(obj["table"])
                return self._table
        table = metrics.feature_table(self.graph())
        self.ensure_dirs()
        self.features_path.write_text(
            json.dumps(
                {"graph_hash": g_hash, "table": table.to_json_obj()},
                ensure_ascii=False,
            ),
            encoding="utf-8",
        )
        self._table = table
        return table

    # -- semantic embeddings ---------------------------------------------------

    def compute_embeddings(
        self,
        config: semantics.EmbeddingProviderConfig,
        lexicon_path: str | None = None,
    ) -> dict[int, semantics.SemanticEmbedding]:
        g = self.graph()
        lex = (
            semantics.Lexicon.from_tsv(lexicon_path)
            if lexicon_path
            else semantics.Lexicon.builtin()
        )
        sem = semantics.embed_all(g, lex, config)
        self.ensure_dirs()
        self.embeddings_path.write_text(
            json.dumps(
                {
                    "graph_hash": self.graph_hash(),
                    "config": config.to_json_obj(),
                    "names": g.node_names,
                    "vectors": [sem[i].vector.tolist() for i in range(g.n_nodes)],
                },
                ensure_ascii=False,
            ),
            encoding="utf-8",
        )
        self._update_state(embed_config=config.to_json_obj())
        return sem

    def embeddings(self) -> dict[int, semantics.SemanticEmbedding]:
        if not self.embeddings_path.exists():
            raise WorkspaceError("no semantic embeddings; run `embed` first")
        obj = json.loads(self.embeddings_path.read_text(encoding="utf-8"))
        if obj.get("graph_hash") != self.graph_hash():
            raise WorkspaceError("embeddings were computed for a different graph; rerun `embed`")
        return {
            i: semantics.SemanticEmbedding(name, np.asarray(vec, dtype=np.float64))
            for i, (name, vec) in enumerate(zip(obj["names"], obj["vectors"]))
        }

    # -- training ------------------------------------------------------------

    def _artifact_stem(self, kind: str) -> str:
        return f"{self.graph_hash()[:12]}_{kind}"

    def train(
        self, config: models.ModelConfig, split_seed: int = 0
    ) -> models.TrainReport:
        g = self.graph()
        split = models.random_link_split(g, seed=split_seed)
        sem = self.embeddings() if config.kind == "seegcn" else None
        store, report = models.train(g, config, split, sem=sem)
        self.ensure_dirs()
        stem = self._artifact_stem(config.kind)
        meta = {
            "kind": config.kind,
            "graph_hash": self.graph_hash(),
            "graph_label": g.label(),
            "config": config.to_json_obj(),
            "split_seed": split_seed,
            "seed": config.seed,
            "best_val_accuracy": report.best_val_accuracy,
        }
        save_checkpoint(store, self.checkpoints_dir / f"{stem}.ckpt", meta)
        report_obj = report.to_json_obj()
        report_obj["graph_hash"] = self.graph_hash()
        report_obj["graph_label"] = g.label()
        (self.train_reports_dir / f"{stem}.json").write_text(
            json.dumps(report_obj, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return report

    def checkpoint(self, kind: str) -> tuple[ParamStore, dict]:
        kind = models.canonical_kind(kind)
        path = self.checkpoints_dir / f"{self._artifact_stem(kind)}.ckpt"
        if not path.exists():
            raise WorkspaceError(
                f"no {kind} checkpoint for the active graph; run `train --model {kind}`"
            )
        store, meta = load_checkpoint(path)
        if meta.get("graph_hash") != self.graph_hash():
            raise GraphCheckpointMismatch(
                "checkpoint was trained on a different graph than the active one"
            )
        return store, meta

    # -- assessment ----------------------------------------------------------

    def assess(self, query: risk.RiskQuery) -> risk.RiskReport:
        g = self.graph()
        store, _ = self.checkpoint(query.model_kind)
        table = self.feature_table()
        sem = self.embeddings() if query.model_kind == "seegcn" else None
        return risk.assess(query, g, table, store, sem=sem)

    # -- reporting -----------------------------------------------------------

    def report_matrix(self) -> dict:
        """Accuracy per (graph, model) from every train report in the workspace."""
        rows: dict[str, dict] = {}
        if self.train_reports_dir.exists():
            for path in sorted(self.train_reports_dir.glob("*.json")):
                obj = json.loads(path.read_text(encoding="utf-8"))
                label = obj.get("graph_label", "?")
                row = rows.setdefault(
                    label, {"graph": label, "graph_hash": obj.get("graph_hash"), "models": {}}
                )
                row["models"][obj["kind"]] = {
                    "best_val_accuracy": obj["best_val_accuracy"],
                    "best_epoch": obj["best_epoch"],
                    "val_auc": obj.get("val_auc"),
                }
        return {"graphs": [rows[k] for k in sorted(rows)]}

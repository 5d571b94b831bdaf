"""Capture real service responses as frontend test fixtures.

Builds the deterministic fixture workspace, runs the actual HTTP app and
writes the JSON bodies the UI tests replay. Rerun after changing anything
that affects scores:

    python scripts/generate_fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from idrisk.cases import SynthConfig, synthesize_cases
from idrisk.models import ModelConfig
from idrisk.service import create_app
from idrisk.workspace import Workspace

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
LOST = ["attr_000", "attr_005"]
THRESHOLD = 75.0
MODEL = "featuregcn"


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        ws = Workspace(Path(tmp) / "ws")
        cases = synthesize_cases(
            SynthConfig(
                n_attributes=40,
                n_cases=300,
                n_communities=5,
                intra_community_bias=0.9,
                seed=21,
            )
        )
        ws.store_cases(cases, source="synthetic")
        ws.build()
        ws.train(ModelConfig(kind=MODEL, seed=2, epochs=5), split_seed=1)
        client = TestClient(create_app(ws.root))

        def save(name: str, content: bytes) -> None:
            (FIXTURES / name).write_bytes(content + b"\n")
            print(f"wrote {name}")

        save("attributes.json", client.get("/api/attributes").content)
        save("stats.json", client.get("/api/graph/stats").content)

        def assess(lost: list[str], threshold: float) -> bytes:
            resp = client.post(
                "/api/assess", json={"lost": lost, "threshold": threshold, "model": MODEL}
            )
            assert resp.status_code == 200, resp.content
            return resp.content

        initial_t0 = assess(LOST, 0.0)
        save("assess_initial_t0.json", initial_t0)
        save("assess_initial_t75.json", assess(LOST, THRESHOLD))

        top = json.loads(initial_t0)["candidates"][0]["attribute"]
        print(f"top candidate at threshold 0: {top}")
        save("edges_top.json", client.get("/api/graph/edges", params={"node": top}).content)

        chained = LOST + [top]
        save("assess_chained_t0.json", assess(chained, 0.0))
        save("assess_chained_t75.json", assess(chained, THRESHOLD))

        meta = {
            "lost": LOST,
            "threshold": THRESHOLD,
            "model": MODEL,
            "top_candidate": top,
        }
        (FIXTURES / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        print("wrote meta.json")


if __name__ == "__main__":
    sys.exit(main())

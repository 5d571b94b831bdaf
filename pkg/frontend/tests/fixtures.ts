/** Loads the JSON bodies captured from the real service (scripts/generate_fixtures.py). */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import type { NodeEdges, RiskReport } from "../src/types.js";

function load<T>(name: string): T {
  // vitest runs with cwd at the frontend root
  return JSON.parse(readFileSync(join(process.cwd(), "tests", "fixtures", name), "utf-8")) as T;
}

export const attributesFixture = load<{ attributes: string[] }>("attributes.json");
export const statsFixture = load<{ n_nodes: number; n_edges: number; total_weight: number }>(
  "stats.json",
);
export const assessInitialT0 = load<RiskReport>("assess_initial_t0.json");
export const assessInitialT75 = load<RiskReport>("assess_initial_t75.json");
export const assessChainedT0 = load<RiskReport>("assess_chained_t0.json");
export const assessChainedT75 = load<RiskReport>("assess_chained_t75.json");
export const edgesTop = load<NodeEdges>("edges_top.json");
export const meta = load<{ lost: string[]; threshold: number; model: string; top_candidate: string }>(
  "meta.json",
);

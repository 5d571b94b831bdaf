/** Thin typed client over the risk service HTTP JSON API. */

import type { ApiErrorBody, GraphStats, NodeEdges, RiskReport } from "./types.js";

export class ApiError extends Error {
  status: number;
  suggestions: string[];

  constructor(status: number, body: ApiErrorBody) {
    super(body.error);
    this.status = status;
    this.suggestions = body.suggestions ?? [];
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, init);
  if (!resp.ok) {
    let body: ApiErrorBody;
    try {
      body = (await resp.json()) as ApiErrorBody;
    } catch {
      body = { error: `request failed with status ${resp.status}` };
    }
    throw new ApiError(resp.status, body);
  }
  return (await resp.json()) as T;
}

export function fetchAttributes(): Promise<{ attributes: string[] }> {
  return request("/api/attributes");
}

export function fetchStats(): Promise<GraphStats> {
  return request("/api/graph/stats");
}

export function fetchEdges(node: string): Promise<NodeEdges> {
  return request(`/api/graph/edges?node=${encodeURIComponent(node)}`);
}

/**
 * Run an assessment. The UI always requests threshold 0 so the full
 * candidate list comes back once; the slider then filters locally.
 */
export function assess(lost: string[], model: string): Promise<RiskReport> {
  return request("/api/assess", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ lost, threshold: 0, model }),
  });
}

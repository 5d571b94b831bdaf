/** Wire types mirroring the service JSON schema (docs/api_schema.json). */

export interface RiskCandidate {
  attribute: string;
  p: number;
  s: number;
  rs_raw: number;
  rs: number;
}

export interface RiskReport {
  query: { lost: string[]; threshold: number; model: string };
  candidates: RiskCandidate[];
  threshold: number;
  model: string;
}

export interface GraphStats {
  n_nodes: number;
  n_edges: number;
  total_weight: number;
}

export interface NodeEdges {
  node: string;
  out: { target: string; weight: number; p: number }[];
  in: { source: string; weight: number }[];
}

export interface ApiErrorBody {
  error: string;
  suggestions?: string[];
}

export interface HistoryEntry {
  lost: string[];
  model: string;
  threshold: number;
  top5: RiskCandidate[];
}

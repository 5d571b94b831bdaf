/** Session state: all rendering is a pure view of this plus the last report.
 *
 * The UI never computes a score; candidates and their numbers come from the
 * server's threshold-0 report, and the slider only filters that list.
 */

import type { HistoryEntry, RiskCandidate, RiskReport } from "./types.js";

export class SessionState {
  attributes: string[] = [];
  lost: string[] = [];
  threshold = 0;
  model = "featuregcn";
  lastReport: RiskReport | null = null;
  history: HistoryEntry[] = [];

  addLost(attribute: string): boolean {
    const name = attribute.trim().toLowerCase();
    if (!name || this.lost.includes(name)) return false;
    this.lost.push(name);
    return true;
  }

  removeLost(attribute: string): void {
    this.lost = this.lost.filter((a) => a !== attribute);
  }

  /** Candidates at the current slider threshold; server order is preserved. */
  visibleCandidates(): RiskCandidate[] {
    if (!this.lastReport) return [];
    return this.lastReport.candidates.filter((c) => c.rs >= this.threshold);
  }

  recordReport(report: RiskReport): void {
    this.lastReport = report;
    this.history.push({
      lost: [...report.query.lost],
      model: report.model,
      threshold: this.threshold,
      top5: report.candidates.slice(0, 5),
    });
  }
}

/** Case-insensitive substring filter for the attribute picker. */
export function searchAttributes(query: string, attributes: string[]): string[] {
  const q = query.trim().toLowerCase();
  if (!q) return attributes;
  return attributes.filter((a) => a.includes(q));
}

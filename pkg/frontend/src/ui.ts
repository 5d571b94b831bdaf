/** DOM rendering: pure functions from state/report data to elements.
 *
 * Numeric cells carry the exact server values in data attributes; the text
 * content is only a fixed-precision formatting of those same values.
 */

import type { NodeEdges, RiskCandidate } from "./types.js";
import { SessionState, searchAttributes } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderChips(
  container: HTMLElement,
  state: SessionState,
  onRemove: (attribute: string) => void,
): void {
  container.replaceChildren();
  for (const name of state.lost) {
    const chip = el("span", "chip", name);
    chip.dataset.attribute = name;
    const x = el("button", "chip-remove", "×");
    x.title = `remove ${name}`;
    x.addEventListener("click", () => onRemove(name));
    chip.appendChild(x);
    container.appendChild(chip);
  }
}

export function renderPicker(
  container: HTMLElement,
  state: SessionState,
  query: string,
  onPick: (attribute: string) => void,
): void {
  container.replaceChildren();
  for (const name of searchAttributes(query, state.attributes)) {
    const item = el("li", "picker-item", name);
    item.dataset.attribute = name;
    if (state.lost.includes(name)) {
      item.classList.add("disabled");
    } else {
      item.addEventListener("click", () => onPick(name));
    }
    container.appendChild(item);
  }
}

export function renderTable(
  tbody: HTMLElement,
  candidates: RiskCandidate[],
  onRowClick: (attribute: string) => void,
): void {
  tbody.replaceChildren();
  for (const c of candidates) {
    const row = el("tr", "result-row");
    row.dataset.attribute = c.attribute;
    row.dataset.p = String(c.p);
    row.dataset.s = String(c.s);
    row.dataset.rs = String(c.rs);

    row.appendChild(el("td", "cell-attribute", c.attribute));
    row.appendChild(el("td", "cell-p", c.p.toFixed(4)));
    row.appendChild(el("td", "cell-s", c.s.toFixed(6)));
    const rsCell = el("td", "cell-rs", c.rs.toFixed(2));
    const bar = el("div", "rs-bar");
    bar.style.width = `${c.rs}%`;
    rsCell.appendChild(bar);
    row.appendChild(rsCell);
    row.addEventListener("click", () => onRowClick(c.attribute));
    tbody.appendChild(row);
  }
}

export function renderNeighborhood(container: HTMLElement, edges: NodeEdges | null): void {
  container.replaceChildren();
  if (!edges) return;
  container.appendChild(el("h3", undefined, `around ${edges.node}`));
  const list = el("ul", "edge-list");
  for (const e of edges.out) {
    const item = el("li", "edge-out", `${edges.node} → ${e.target}`);
    item.appendChild(el("span", "edge-meta", ` w=${e.weight}, p=${e.p.toFixed(3)}`));
    list.appendChild(item);
  }
  for (const e of edges.in) {
    const item = el("li", "edge-in", `${e.source} → ${edges.node}`);
    item.appendChild(el("span", "edge-meta", ` w=${e.weight}`));
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderHistory(container: HTMLElement, state: SessionState): void {
  container.replaceChildren();
  for (const entry of state.history) {
    const item = el("li", "history-entry");
    item.appendChild(
      el("div", "history-query", `${entry.lost.join(", ")} @ ${entry.threshold} (${entry.model})`),
    );
    const tops = el("ol", "history-top5");
    for (const c of entry.top5) {
      tops.appendChild(el("li", undefined, `${c.attribute}: ${c.rs.toFixed(2)}`));
    }
    item.appendChild(tops);
    container.appendChild(item);
  }
}

export function showBanner(banner: HTMLElement, message: string, suggestions: string[] = []): void {
  banner.textContent = message;
  if (suggestions.length) {
    banner.textContent += ` — did you mean: ${suggestions.join(", ")}?`;
  }
  banner.classList.remove("hidden");
}

export function hideBanner(banner: HTMLElement): void {
  banner.textContent = "";
  banner.classList.add("hidden");
}

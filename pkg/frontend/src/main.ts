/** Wires the what-if console: pick lost attributes, slide the threshold,
 * assess, inspect, then chain further disclosures by clicking results. */

import { ApiError, assess, fetchAttributes, fetchEdges, fetchStats } from "./api.js";
import { SessionState } from "./state.js";
import {
  hideBanner,
  renderChips,
  renderHistory,
  renderNeighborhood,
  renderPicker,
  renderTable,
  showBanner,
} from "./ui.js";

export function mountApp(root: Document = document): SessionState {
  const state = new SessionState();
  const $ = (id: string) => {
    const node = root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
  };

  const banner = $("banner");
  const pickerInput = $("picker-input") as HTMLInputElement;
  const pickerList = $("picker-list");
  const chips = $("chips");
  const modelSelect = $("model-select") as HTMLSelectElement;
  const slider = $("threshold-slider") as HTMLInputElement;
  const sliderValue = $("threshold-value");
  const assessBtn = $("assess-btn") as HTMLButtonElement;
  const tableBody = $("results-body");
  const neighborhood = $("neighborhood");
  const historyList = $("history");
  const statsLine = $("stats");

  let inFlight = false;

  function redrawControls(): void {
    renderChips(chips, state, (name) => {
      state.removeLost(name);
      redrawControls();
    });
    renderPicker(pickerList, state, pickerInput.value, (name) => {
      state.addLost(name);
      pickerInput.value = "";
      redrawControls();
    });
    assessBtn.disabled = state.lost.length === 0;
  }

  function redrawResults(): void {
    renderTable(tableBody, state.visibleCandidates(), (attribute) => {
      // what-if chaining: a clicked result becomes a lost attribute
      if (state.addLost(attribute)) {
        redrawControls();
        void runAssessment();
      }
    });
    renderHistory(historyList, state);
  }

  async function runAssessment(): Promise<void> {
    if (inFlight || state.lost.length === 0) return;
    inFlight = true;
    assessBtn.classList.add("busy");
    try {
      const report = await assess(state.lost, state.model);
      state.recordReport(report);
      hideBanner(banner);
      redrawResults();
      const visible = state.visibleCandidates();
      if (visible.length) {
        renderNeighborhood(neighborhood, await fetchEdges(visible[0].attribute));
      } else {
        renderNeighborhood(neighborhood, null);
      }
    } catch (err) {
      if (err instanceof ApiError) {
        showBanner(banner, err.message, err.suggestions);
      } else {
        showBanner(banner, "cannot reach the risk service");
      }
    } finally {
      inFlight = false;
      assessBtn.classList.remove("busy");
    }
  }

  pickerInput.addEventListener("input", () => redrawControls());
  pickerInput.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "Enter" && pickerInput.value.trim()) {
      // free text is allowed; the server reports suggestions if unknown
      state.addLost(pickerInput.value);
      pickerInput.value = "";
      redrawControls();
    }
  });
  modelSelect.addEventListener("change", () => {
    state.model = modelSelect.value;
  });
  slider.addEventListener("input", () => {
    state.threshold = Number(slider.value);
    sliderValue.textContent = slider.value;
    redrawResults(); // client-side re-filter, no re-query
  });
  assessBtn.addEventListener("click", () => void runAssessment());

  void (async () => {
    try {
      const [attrs, stats] = await Promise.all([fetchAttributes(), fetchStats()]);
      state.attributes = attrs.attributes;
      statsLine.textContent = `${stats.n_nodes} attributes, ${stats.n_edges} disclosure edges`;
      hideBanner(banner);
      redrawControls();
    } catch {
      showBanner(banner, "cannot reach the risk service");
    }
  })();

  return state;
}

if (typeof document !== "undefined" && document.getElementById("app-root")) {
  mountApp();
}

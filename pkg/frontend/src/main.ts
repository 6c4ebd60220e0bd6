/** App shell: hash routing, event wiring, and panel refresh.
 *
 * All analysis numbers come from the API; this module only moves state and
 * re-renders.  In-flight requests are cancelled per panel on every state
 * change (latest wins).
 */

import { ApiClient } from "./api.js";
import { decodeState, encodeState, ExplorationState } from "./state.js";
import { loadTrainingData, renderTrainingView } from "./views/training.js";
import { loadResultsData, renderResultsView } from "./views/results.js";
import { loadComparisonData, renderComparisonView } from "./views/comparison.js";

const api = new ApiClient("");
let state: ExplorationState = decodeState(window.location.hash);
let generation = 0;

function pushState(next: ExplorationState): void {
  state = next;
  const hash = encodeState(state);
  if (window.location.hash !== hash) {
    window.history.replaceState(null, "", hash);
  }
  void refresh();
}

async function refresh(): Promise<void> {
  const my = ++generation;
  const root = document.getElementById("view-root")!;
  for (const link of document.querySelectorAll<HTMLAnchorElement>("nav a[data-view]")) {
    link.classList.toggle("active", link.dataset.view === state.view);
  }
  let html: string;
  if (state.view === "training") {
    const data = await loadTrainingData(api, state);
    if (my !== generation) return;
    html = renderTrainingView(state, data);
  } else if (state.view === "results") {
    const data = await loadResultsData(api, state);
    if (my !== generation) return;
    html = renderResultsView(state, data);
  } else {
    const data = await loadComparisonData(api, state);
    if (my !== generation) return;
    html = renderComparisonView(state, data);
  }
  root.innerHTML = html;
}

function onClick(event: MouseEvent): void {
  const target = event.target as HTMLElement;
  const nav = target.closest<HTMLAnchorElement>("nav a[data-view]");
  if (nav) {
    event.preventDefault();
    pushState({ ...state, view: nav.dataset.view as ExplorationState["view"], highlight: null });
    return;
  }
  const nodeEl = target.closest<HTMLElement>("[data-node]");
  if (nodeEl?.dataset.node) {
    pushState({ ...state, node: nodeEl.dataset.node });
    return;
  }
  const finding = target.closest<HTMLElement>("[data-highlight]");
  if (finding?.dataset.highlight) {
    const key = finding.dataset.highlight;
    pushState({ ...state, highlight: state.highlight === key ? null : key });
    return;
  }
  const cell = target.closest<HTMLElement>(".trend-cell[data-category]");
  if (cell?.dataset.category) {
    const key = cell.dataset.category;
    pushState({ ...state, highlight: state.highlight === key ? null : key });
  }
}

function onChange(event: Event): void {
  const input = event.target as HTMLInputElement;
  const control = input.dataset.control;
  if (!control) return;
  // the exact string shown in the control is what gets re-queried
  pushState({ ...state, [control]: input.value });
}

window.addEventListener("hashchange", () => {
  state = decodeState(window.location.hash);
  void refresh();
});
document.addEventListener("click", onClick);
document.addEventListener("change", onChange);
void refresh();

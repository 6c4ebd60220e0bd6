/** Exploration state, URL-encoded in the location hash for shareable links.
 *
 * Threshold values are kept as the exact strings shown in the controls so a
 * re-query sends precisely the value the user sees (no float round-trip).
 */

export type ViewName = "training" | "results" | "comparison";

export interface ExplorationState {
  view: ViewName;
  node: string | null;
  runs: string[];
  beta: string;
  trust: string;
  minFlow: string;
  fanin: string;
  epsilon: string;
  minShare: string;
  highlight: string | null;
}

export const DEFAULT_STATE: ExplorationState = {
  view: "training",
  node: null,
  runs: [],
  beta: "0.5",
  trust: "0.5",
  minFlow: "5",
  fanin: "3",
  epsilon: "0.005",
  minShare: "0.005",
  highlight: null,
};

const VIEWS: ViewName[] = ["training", "results", "comparison"];

export function encodeState(state: ExplorationState): string {
  const params = new URLSearchParams();
  if (state.node !== null) params.set("node", state.node);
  if (state.runs.length > 0) params.set("runs", state.runs.join(","));
  if (state.highlight !== null) params.set("highlight", state.highlight);
  for (const key of ["beta", "trust", "minFlow", "fanin", "epsilon", "minShare"] as const) {
    if (state[key] !== DEFAULT_STATE[key]) params.set(key, state[key]);
  }
  const query = params.toString();
  return `#/${state.view}${query ? "?" + query : ""}`;
}

export function decodeState(hash: string): ExplorationState {
  const state: ExplorationState = { ...DEFAULT_STATE, runs: [] };
  const stripped = hash.replace(/^#\/?/, "");
  const [view, query] = stripped.split("?", 2);
  if (VIEWS.includes(view as ViewName)) state.view = view as ViewName;
  if (query) {
    const params = new URLSearchParams(query);
    state.node = params.get("node");
    state.highlight = params.get("highlight");
    const runs = params.get("runs");
    state.runs = runs ? runs.split(",").filter((r) => r.length > 0) : [];
    for (const key of ["beta", "trust", "minFlow", "fanin", "epsilon", "minShare"] as const) {
      const value = params.get(key);
      if (value !== null) state[key] = value;
    }
  }
  return state;
}

/** Comparison view: accuracy trend grid plus the concatenated model-diff
 * Sankey.  Clicking a trend cell filters the Sankey visually to ribbons
 * touching that category; the slider re-queries with the shown min-share.
 */

import { ApiClient, STALE } from "../api.js";
import type { ExplorationState } from "../state.js";
import { renderSankey } from "../render/sankey.js";
import { renderTrendGrid } from "../render/trend.js";
import { esc } from "../render/svg.js";
import { errorPanel } from "./training.js";
import {
  ApiResult,
  ModelDiffPayload,
  RunJson,
  TrendJson,
  bodyOf,
  isError,
} from "../types.js";

export interface ComparisonData {
  runs: ApiResult<RunJson[]> | null;
  selected_runs: string[];
  trends: ApiResult<TrendJson[]> | null;
  diff: ApiResult<ModelDiffPayload> | null;
}

export function selectedRuns(state: ExplorationState, runs: RunJson[]): string[] {
  if (state.runs.length >= 2) return state.runs;
  return runs.map((r) => r.model_id);
}

export async function loadComparisonData(
  api: ApiClient,
  state: ExplorationState
): Promise<ComparisonData> {
  const empty: ComparisonData = { runs: null, selected_runs: [], trends: null, diff: null };
  const runs = await api.get<RunJson[]>("comparison:runs", "/api/runs");
  if (runs === STALE) return empty;
  if (isError(runs)) return { ...empty, runs };
  const chosen = selectedRuns(state, bodyOf(runs));
  if (chosen.length < 2) return { ...empty, runs, selected_runs: chosen };
  const runsParam = chosen.map(encodeURIComponent).join(",");
  const [trends, diff] = await Promise.all([
    api.get<TrendJson[]>(
      "comparison:trends",
      `/api/trends?runs=${runsParam}&epsilon=${state.epsilon}`
    ),
    api.get<ModelDiffPayload>(
      "comparison:diff",
      `/api/flows/model-diff?runs=${runsParam}&minShare=${state.minShare}`
    ),
  ]);
  return {
    runs,
    selected_runs: chosen,
    trends: trends === STALE ? null : trends,
    diff: diff === STALE ? null : diff,
  };
}

export function renderComparisonView(state: ExplorationState, data: ComparisonData): string {
  if (!data.runs) return `<div class="empty-state">loading</div>`;
  if (isError(data.runs)) return errorPanel(data.runs);
  if (data.selected_runs.length < 2) {
    return (
      `<div class="empty-state disabled" data-panel="comparison-disabled">` +
      `model comparison needs at least two evaluation runs; this snapshot has ` +
      `${String(bodyOf(data.runs).length)}</div>`
    );
  }

  const trendsHtml =
    !data.trends || isError(data.trends)
      ? data.trends
        ? errorPanel(data.trends)
        : `<div class="empty-state">loading</div>`
      : renderTrendGrid(bodyOf(data.trends), state.highlight);

  let diffHtml: string;
  if (!data.diff) {
    diffHtml = `<div class="empty-state">loading</div>`;
  } else if (isError(data.diff)) {
    diffHtml = errorPanel(data.diff);
  } else {
    const payload = bodyOf(data.diff);
    if (payload.layout === null) {
      diffHtml = `<div class="empty-state">no shared evaluation items</div>`;
    } else {
      const highlight = state.highlight ? new Set([state.highlight]) : undefined;
      diffHtml =
        renderSankey(payload.layout, { width: 640, height: 420, highlight }) +
        `<p class="note">models: ${payload.flow.layers.map((l) => `<em>${esc(l)}</em>`).join(" &rarr; ")}</p>`;
    }
  }

  return `
<div class="view comparison-view">
  <section class="panel" data-panel="trends">
    <h3>Accuracy trends (${data.selected_runs.map(esc).join(" &rarr; ")})</h3>
    <label>&epsilon;
      <input data-control="epsilon" type="number" step="0.001" min="0" value="${esc(state.epsilon)}">
    </label>
    ${trendsHtml}
  </section>
  <section class="panel" data-panel="model-diff">
    <h3>Prediction changes</h3>
    <label>min share
      <input data-control="minShare" type="range" min="0" max="0.05" step="0.001" value="${esc(state.minShare)}">
      <span class="min-share-value">${esc(state.minShare)}</span>
    </label>
    ${diffHtml}
  </section>
</div>`;
}

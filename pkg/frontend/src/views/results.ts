/** Results view: accuracy-colored radial tree, misclassification Sankey for
 * the selected run, and the diagnostics list with click-to-highlight.
 */

import { ApiClient, STALE } from "../api.js";
import type { ExplorationState } from "../state.js";
import { accuracyColor, renderRadial } from "../render/radial.js";
import { renderSankey } from "../render/sankey.js";
import { esc } from "../render/svg.js";
import { errorPanel } from "./training.js";
import {
  AccuracyRowJson,
  ApiResult,
  FindingJson,
  MisclassificationPayload,
  RunJson,
  TaxonomyPayload,
  bodyOf,
  isError,
} from "../types.js";

export interface ResultsData {
  taxonomy: ApiResult<TaxonomyPayload> | null;
  runs: ApiResult<RunJson[]> | null;
  run_id: string | null;
  accuracy: ApiResult<AccuracyRowJson[]> | null;
  misclassification: ApiResult<MisclassificationPayload> | null;
  findings: ApiResult<FindingJson[]> | null;
}

export function activeRun(state: ExplorationState, runs: RunJson[]): string | null {
  if (state.runs.length > 0) return state.runs[0];
  return runs.length > 0 ? runs[runs.length - 1].model_id : null;
}

export async function loadResultsData(
  api: ApiClient,
  state: ExplorationState
): Promise<ResultsData> {
  const empty: ResultsData = {
    taxonomy: null,
    runs: null,
    run_id: null,
    accuracy: null,
    misclassification: null,
    findings: null,
  };
  const [taxonomy, runs] = await Promise.all([
    api.get<TaxonomyPayload>("results:taxonomy", "/api/taxonomy"),
    api.get<RunJson[]>("results:runs", "/api/runs"),
  ]);
  if (taxonomy === STALE || runs === STALE) return empty;
  if (isError(runs)) return { ...empty, taxonomy, runs };
  const runId = activeRun(state, bodyOf(runs));
  if (runId === null) return { ...empty, taxonomy, runs };
  const base = `/api/runs/${encodeURIComponent(runId)}`;
  const [accuracy, misclassification, findings] = await Promise.all([
    api.get<AccuracyRowJson[]>("results:accuracy", `${base}/accuracy`),
    api.get<MisclassificationPayload>("results:mis", `${base}/misclassification`),
    api.get<FindingJson[]>(
      "results:diagnose",
      `${base}/diagnose?minFlow=${state.minFlow}&fanin=${state.fanin}`
    ),
  ]);
  return {
    taxonomy,
    runs,
    run_id: runId,
    accuracy: accuracy === STALE ? null : accuracy,
    misclassification: misclassification === STALE ? null : misclassification,
    findings: findings === STALE ? null : findings,
  };
}

function findingsPanel(state: ExplorationState, findings: FindingJson[]): string {
  if (findings.length === 0) {
    return `<div class="empty-state">no findings at these thresholds</div>`;
  }
  const items = findings
    .map((f) => {
      const key = f.subjects.join(",");
      const active = state.highlight === key;
      return (
        `<li class="finding${active ? " active" : ""}" data-highlight="${esc(key)}">` +
        `<span class="kind">${esc(f.kind)}</span> ` +
        f.subjects.map((s) => `<code>${esc(s)}</code>`).join(" ") +
        `<span class="severity">${String(f.severity)}</span></li>`
      );
    })
    .join("");
  return `<ol class="findings">${items}</ol>`;
}

export function renderResultsView(state: ExplorationState, data: ResultsData): string {
  if (!data.taxonomy) return `<div class="empty-state">loading</div>`;
  if (isError(data.taxonomy)) return errorPanel(data.taxonomy);
  if (data.runs && isError(data.runs)) return errorPanel(data.runs);
  if (data.run_id === null) {
    return `<div class="empty-state">no evaluation runs in this snapshot</div>`;
  }
  const taxonomy = bodyOf(data.taxonomy);
  const names = Object.fromEntries(taxonomy.nodes.map((n) => [n.id, n.name]));
  const accuracyByCategory = new Map<string, number>();
  if (data.accuracy && !isError(data.accuracy)) {
    for (const row of bodyOf(data.accuracy)) {
      accuracyByCategory.set(row.category, row.accuracy);
    }
  }
  const radial = renderRadial(taxonomy.radial, {
    size: 430,
    selected: state.node,
    names,
    fill: (node) => {
      const accuracy = accuracyByCategory.get(node);
      return accuracy === undefined ? "#c9d2d8" : accuracyColor(accuracy);
    },
  });

  let flowPanel: string;
  if (!data.misclassification) {
    flowPanel = `<div class="empty-state">loading</div>`;
  } else if (isError(data.misclassification)) {
    flowPanel = errorPanel(data.misclassification);
  } else {
    const payload = bodyOf(data.misclassification);
    if (payload.layout === null) {
      flowPanel = `<div class="empty-state">no misclassifications: the model is perfect on this set</div>`;
    } else {
      const highlight = state.highlight
        ? new Set(state.highlight.split(","))
        : undefined;
      flowPanel =
        renderSankey(payload.layout, { width: 520, height: 380, highlight }) +
        `<p class="note">errors: <span class="count">${String(payload.matrix.total)}</span></p>`;
    }
  }

  const findingsHtml =
    !data.findings || isError(data.findings)
      ? data.findings
        ? errorPanel(data.findings)
        : `<div class="empty-state">loading</div>`
      : findingsPanel(state, bodyOf(data.findings));

  return `
<div class="view results-view">
  <section class="panel panel-left" data-panel="accuracy-radial">
    <h3>Class accuracy — run <em>${esc(data.run_id)}</em></h3>
    ${radial}
  </section>
  <div class="panel-right">
    <section class="panel" data-panel="misclassification">
      <h3>Misclassification flows</h3>
      ${flowPanel}
    </section>
    <section class="panel" data-panel="findings">
      <h3>Diagnostics</h3>
      <label>min flow
        <input data-control="minFlow" type="number" step="1" min="1" value="${esc(state.minFlow)}">
      </label>
      <label>fan-in
        <input data-control="fanin" type="number" step="1" min="2" value="${esc(state.fanin)}">
      </label>
      ${findingsHtml}
    </section>
  </div>
</div>`;
}

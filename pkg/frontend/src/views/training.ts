/** Training-data view: radial tree (left) drives selection; the right side
 * shows the sibling label-quantity Sankey and the selected node's
 * source/decision quality Sankey.  Every number shown comes verbatim from an
 * API payload.
 */

import { ApiClient, STALE } from "../api.js";
import type { ExplorationState } from "../state.js";
import { renderRadial } from "../render/radial.js";
import { renderSankey } from "../render/sankey.js";
import { esc } from "../render/svg.js";
import {
  ApiResult,
  QualityPayload,
  QuantityPayload,
  TaxonomyPayload,
  bodyOf,
  errorOf,
  isError,
} from "../types.js";

export interface TrainingData {
  taxonomy: ApiResult<TaxonomyPayload> | null;
  quantity: ApiResult<QuantityPayload> | null;
  quality: ApiResult<QualityPayload> | null;
}

export function quantityAnchor(taxonomy: TaxonomyPayload, selected: string | null): string {
  const root = taxonomy.nodes.find((n) => n.parent_id === null)!;
  if (selected === null) return root.id;
  const node = taxonomy.nodes.find((n) => n.id === selected);
  if (!node) return root.id;
  return node.parent_id ?? root.id; // siblings of the selection
}

export async function loadTrainingData(
  api: ApiClient,
  state: ExplorationState
): Promise<TrainingData> {
  const taxonomy = await api.get<TaxonomyPayload>("training:taxonomy", "/api/taxonomy");
  if (taxonomy === STALE) return { taxonomy: null, quantity: null, quality: null };
  if (isError(taxonomy)) return { taxonomy, quantity: null, quality: null };
  const payload = bodyOf(taxonomy);
  const anchor = quantityAnchor(payload, state.node);
  const selected = state.node ?? anchor;
  const [quantity, quality] = await Promise.all([
    api.get<QuantityPayload>(
      "training:quantity",
      `/api/nodes/${encodeURIComponent(anchor)}/quantity?beta=${state.beta}`
    ),
    api.get<QualityPayload>(
      "training:quality",
      `/api/nodes/${encodeURIComponent(selected)}/quality?trust=${state.trust}`
    ),
  ]);
  return {
    taxonomy,
    quantity: quantity === STALE ? null : quantity,
    quality: quality === STALE ? null : quality,
  };
}

export function errorPanel(result: ApiResult<unknown>): string {
  const error = errorOf(result);
  const cls = result.status === 422 ? "empty-state" : "error-state";
  return `<div class="${cls}" data-code="${esc(error.code)}">${esc(error.message)}</div>`;
}

function quantityPanel(state: ExplorationState, data: TrainingData): string {
  if (!data.quantity) return `<div class="empty-state">loading</div>`;
  if (isError(data.quantity)) return errorPanel(data.quantity);
  const payload = bodyOf(data.quantity);
  const rows = Object.entries(payload.counts)
    .map(([child, count]) => {
      const flagged = payload.flagged.includes(child);
      return (
        `<li data-node="${esc(child)}"${flagged ? ' class="flagged"' : ""}>` +
        `<span class="label">${esc(child)}</span>` +
        `<span class="count">${String(count)}</span></li>`
      );
    })
    .join("");
  const sankey = payload.layout
    ? renderSankey(payload.layout, { width: 430, height: 260 })
    : `<div class="empty-state">no labeled data under ${esc(payload.parent)}</div>`;
  return (
    `<h3>Label quantity under <em>${esc(payload.parent)}</em></h3>` +
    sankey +
    `<ul class="count-list">${rows}</ul>`
  );
}

function qualityPanel(data: TrainingData): string {
  if (!data.quality) return `<div class="empty-state">loading</div>`;
  if (isError(data.quality)) return errorPanel(data.quality);
  const payload = bodyOf(data.quality);
  const sankey = payload.layout
    ? renderSankey(payload.layout, { width: 430, height: 220 })
    : `<div class="empty-state">no labels</div>`;
  const badge = payload.flagged
    ? `<span class="badge flagged">low trust</span>`
    : `<span class="badge ok">trusted</span>`;
  const cells = payload.matrix.left_labels
    .map((source, i) =>
      payload.matrix.right_labels
        .map(
          (decision, j) =>
            `<li><span class="label">${esc(source)} &rarr; ${esc(decision)}</span>` +
            `<span class="count">${String(payload.matrix.counts[i][j])}</span></li>`
        )
        .join("")
    )
    .join("");
  return (
    `<h3>Label quality of <em>${esc(payload.category)}</em> ${badge}</h3>` +
    sankey +
    `<ul class="count-list">${cells}</ul>`
  );
}

export function renderTrainingView(state: ExplorationState, data: TrainingData): string {
  if (!data.taxonomy) return `<div class="empty-state">loading</div>`;
  if (isError(data.taxonomy)) return errorPanel(data.taxonomy);
  const taxonomy = bodyOf(data.taxonomy);
  const names = Object.fromEntries(taxonomy.nodes.map((n) => [n.id, n.name]));
  const radial = renderRadial(taxonomy.radial, {
    size: 430,
    selected: state.node,
    names,
  });
  return `
<div class="view training-view">
  <section class="panel panel-left" data-panel="radial">
    <h3>Taxonomy</h3>
    ${radial}
  </section>
  <div class="panel-right">
    <section class="panel" data-panel="quantity">
      <label>imbalance &beta;
        <input data-control="beta" type="number" step="0.05" min="0" max="1" value="${esc(state.beta)}">
      </label>
      ${quantityPanel(state, data)}
    </section>
    <section class="panel" data-panel="quality">
      <label>trust threshold
        <input data-control="trust" type="number" step="0.05" min="0" max="1" value="${esc(state.trust)}">
      </label>
      ${qualityPanel(data)}
    </section>
  </div>
</div>`;
}

/** Payload shapes of the flowlens HTTP API (see docs/formats.md). */

export interface SankeyNodeJson {
  label: string;
  layer: number;
  y: number;
  h: number;
  colorIndex: number;
}

export interface SankeyLinkJson {
  s: number;
  t: number;
  w: number;
  so: number;
  to: number;
}

export interface SankeyLayoutJson {
  nodes: SankeyNodeJson[];
  links: SankeyLinkJson[];
  crossings: number;
}

export interface RadialJson {
  placements: Record<string, [number, number]>; // node -> [radius, angle]
  sectors: Record<string, [number, number]>;
  edges: [string, string][];
  weights?: Record<string, number>;
}

export interface FlowMatrixJson {
  left_labels: string[];
  right_labels: string[];
  counts: number[][];
  left_marginal: Record<string, number>;
  right_marginal: Record<string, number>;
  total: number;
}

export interface TaxonomyNodeJson {
  id: string;
  name: string;
  parent_id: string | null;
  level: number;
  label_count: number;
  positive_subtree_count: number;
  subtree_count: number;
}

export interface TaxonomyPayload {
  nodes: TaxonomyNodeJson[];
  radial: RadialJson;
  created_at: string;
  stats: { nodes: number; instances: number; features: number; runs: Record<string, number> };
}

export interface QuantityPayload {
  parent: string;
  counts: Record<string, number>;
  shares: Record<string, number>;
  flagged: string[];
  threshold_beta: number;
  matrix: FlowMatrixJson;
  layout: SankeyLayoutJson | null;
}

export interface QualityPayload {
  category: string;
  matrix: FlowMatrixJson;
  trusted_share: number;
  flagged: boolean;
  trust_threshold: number;
  layout: SankeyLayoutJson | null;
}

export interface AccuracyRowJson {
  category: string;
  sample_size: number;
  accuracy: number;
}

export interface MisclassificationPayload {
  run: string;
  matrix: FlowMatrixJson;
  layout: SankeyLayoutJson | null;
}

export interface FindingJson {
  kind: string;
  subjects: string[];
  severity: number;
  evidence: Record<string, unknown>;
}

export interface TrendJson {
  category: string;
  series: number[];
  class: string;
  color: "blue" | "red" | "light_blue" | "orange";
}

export interface LayeredFlowJson {
  layers: string[];
  matrices: FlowMatrixJson[];
  item_paths: Record<string, string[]>;
}

export interface ModelDiffPayload {
  flow: LayeredFlowJson;
  layout: SankeyLayoutJson | null;
}

export interface RunJson {
  model_id: string;
  ordinal: number;
  size: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: unknown;
}

/** Envelope returned by ApiClient: success body or error body with status. */
export interface ApiResult<T> {
  status: number;
  body: T | ApiErrorBody;
}

export function isError<T>(result: ApiResult<T>): boolean {
  return result.status >= 400;
}

export function errorOf<T>(result: ApiResult<T>): ApiErrorBody {
  return result.body as ApiErrorBody;
}

export function bodyOf<T>(result: ApiResult<T>): T {
  return result.body as T;
}

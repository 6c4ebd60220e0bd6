/** Radial tree rendering from server placements; nodes are selectable. */

import type { RadialJson } from "../types.js";
import { el, esc, fmt, svgDocument } from "./svg.js";

const MARGIN = 26;

export interface RadialOptions {
  size?: number;
  selected?: string | null;
  /** Optional per-node fill override, e.g. accuracy coloring. */
  fill?: (node: string) => string | null;
  names?: Record<string, string>;
}

/** Red-to-green ramp for accuracy in [0, 1]; presentation only. */
export function accuracyColor(accuracy: number): string {
  const clamped = Math.max(0, Math.min(1, accuracy));
  const red = Math.round(214 - clamped * (214 - 46));
  const green = Math.round(60 + clamped * (160 - 60));
  const blue = 60;
  return `rgb(${red},${green},${blue})`;
}

export function renderRadial(radial: RadialJson, options: RadialOptions = {}): string {
  const size = options.size ?? 420;
  const center = size / 2;
  const rim = size / 2 - MARGIN;
  const weights = radial.weights ?? {};
  const maxWeight = Object.values(weights).reduce((a, b) => Math.max(a, b), 0);

  const point = (node: string): [number, number] => {
    const [radius, angle] = radial.placements[node];
    return [center + rim * radius * Math.cos(angle), center + rim * radius * Math.sin(angle)];
  };

  const body: string[] = [];
  for (const [parent, child] of radial.edges) {
    const [x1, y1] = point(parent);
    const [x2, y2] = point(child);
    body.push(
      el("line", { x1, y1, x2, y2, stroke: "#c5ced4", "stroke-width": "1" })
    );
  }
  for (const node of Object.keys(radial.placements)) {
    const [x, y] = point(node);
    const share = maxWeight > 0 ? (weights[node] ?? 0) / maxWeight : 0;
    const fill = options.fill?.(node) ?? "#4e79a7";
    const selected = options.selected === node;
    body.push(
      el("circle", {
        cx: x,
        cy: y,
        r: 3 + 4 * share + (selected ? 2 : 0),
        fill,
        stroke: selected ? "#1d2731" : "none",
        "stroke-width": selected ? "2" : "0",
        class: "radial-node",
        "data-node": node,
      },
      el("title", {}, esc(options.names?.[node] ?? node)))
    );
  }
  return svgDocument(size, size, body);
}

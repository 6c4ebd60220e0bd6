/** Small-multiple trend cells, color-coded by the server's trend class. */

import type { TrendJson } from "../types.js";
import { el, esc, fmt, svgDocument } from "./svg.js";

/** Fixed mapping from the API color keys to CSS colors:
 * strictly increasing -> blue, strictly decreasing -> red,
 * overall increasing / stable -> light blue, overall decreasing -> orange.
 */
export const TREND_COLORS: Record<TrendJson["color"], string> = {
  blue: "#1f77b4",
  red: "#d62728",
  light_blue: "#9ecae1",
  orange: "#ff7f0e",
};

const CELL_W = 132;
const CELL_H = 66;
const PAD = 8;

export function renderTrendCell(trend: TrendJson, selected = false): string {
  const color = TREND_COLORS[trend.color];
  const n = trend.series.length;
  const xs = trend.series.map((_, i) => PAD + (i * (CELL_W - 2 * PAD)) / (n - 1));
  const lo = Math.min(...trend.series);
  const hi = Math.max(...trend.series);
  const spanY = hi - lo || 1;
  const ys = trend.series.map(
    (v) => CELL_H - PAD - ((v - lo) / spanY) * (CELL_H - 2 * PAD - 12)
  );
  const points = xs.map((x, i) => `${fmt(x)},${fmt(ys[i])}`).join(" ");
  const body = [
    el("rect", {
      x: 0.5,
      y: 0.5,
      width: CELL_W - 1,
      height: CELL_H - 1,
      fill: "#ffffff",
      stroke: selected ? "#1d2731" : "#d7dde2",
      "stroke-width": selected ? "2" : "1",
    }),
    el("polyline", {
      points,
      fill: "none",
      stroke: color,
      "stroke-width": "2",
      class: "trend-line",
    }),
    el(
      "text",
      { x: PAD, y: 12, "font-size": "10", fill: "#30383f" },
      esc(trend.category)
    ),
  ];
  return svgDocument(CELL_W, CELL_H, body);
}

export function renderTrendGrid(trends: TrendJson[], selected: string | null): string {
  const cells = trends
    .map(
      (t) =>
        `<div class="trend-cell" data-category="${esc(t.category)}" data-color="${t.color}">` +
        renderTrendCell(t, t.category === selected) +
        "</div>"
    )
    .join("\n");
  return `<div class="trend-grid">${cells}</div>`;
}

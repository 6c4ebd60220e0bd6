/** Sankey rendering from server-computed normalized geometry.
 *
 * The client scales coordinates into pixels and never recomputes flows:
 * every ribbon thickness and node height comes from the layout payload.
 */

import type { SankeyLayoutJson } from "../types.js";
import { el, esc, fmt, PALETTE, svgDocument } from "./svg.js";

const MARGIN = 24;
const NODE_WIDTH = 12;
const DIM_OPACITY = 0.06;
const LINK_OPACITY = 0.4;

export interface SankeyOptions {
  width?: number;
  height?: number;
  /** Labels to keep bright; everything not touching them is dimmed. */
  highlight?: ReadonlySet<string>;
}

export function renderSankey(layout: SankeyLayoutJson, options: SankeyOptions = {}): string {
  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const highlight = options.highlight;
  const layerCount = layout.nodes.reduce((acc, n) => Math.max(acc, n.layer), 0) + 1;
  const usableH = height - 2 * MARGIN;
  const span = width - 2 * MARGIN - NODE_WIDTH;
  const step = layerCount > 1 ? span / (layerCount - 1) : 0;
  const nodeX = (layer: number) => MARGIN + layer * step;
  const y = (v: number) => MARGIN + v * usableH;

  const body: string[] = [];
  for (const link of layout.links) {
    const src = layout.nodes[link.s];
    const tgt = layout.nodes[link.t];
    const bright =
      highlight === undefined ||
      highlight.size === 0 ||
      highlight.has(src.label) ||
      highlight.has(tgt.label);
    const sx = nodeX(src.layer) + NODE_WIDTH;
    const tx = nodeX(tgt.layer);
    const mx = (sx + tx) / 2;
    const sy0 = y(src.y + link.so);
    const sy1 = y(src.y + link.so + link.w);
    const ty0 = y(tgt.y + link.to);
    const ty1 = y(tgt.y + link.to + link.w);
    const d =
      `M ${fmt(sx)},${fmt(sy0)} C ${fmt(mx)},${fmt(sy0)} ${fmt(mx)},${fmt(ty0)} ` +
      `${fmt(tx)},${fmt(ty0)} L ${fmt(tx)},${fmt(ty1)} C ${fmt(mx)},${fmt(ty1)} ` +
      `${fmt(mx)},${fmt(sy1)} ${fmt(sx)},${fmt(sy1)} Z`;
    body.push(
      el("path", {
        d,
        fill: PALETTE[src.colorIndex % PALETTE.length],
        "fill-opacity": bright ? String(LINK_OPACITY) : String(DIM_OPACITY),
        class: "ribbon",
        "data-source": src.label,
        "data-target": tgt.label,
      })
    );
  }
  for (const node of layout.nodes) {
    body.push(
      el("rect", {
        x: nodeX(node.layer),
        y: y(node.y),
        width: NODE_WIDTH,
        height: node.h * usableH,
        fill: PALETTE[node.colorIndex % PALETTE.length],
        class: "node",
        "data-node": node.label,
      })
    );
  }
  for (const node of layout.nodes) {
    const last = node.layer === layerCount - 1;
    body.push(
      el(
        "text",
        {
          x: last ? nodeX(node.layer) - 4 : nodeX(node.layer) + NODE_WIDTH + 4,
          y: y(node.y + node.h / 2),
          "font-size": "10",
          "text-anchor": last ? "end" : "start",
          "dominant-baseline": "middle",
        },
        esc(node.label)
      )
    );
  }
  return svgDocument(width, height, body);
}

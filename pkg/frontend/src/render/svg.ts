/** Markup-string SVG helpers; rendering stays pure and DOM-free. */

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children = ""
): string {
  const parts = Object.entries(attrs)
    .map(([key, value]) => `${key}="${typeof value === "number" ? fmt(value) : esc(value)}"`)
    .join(" ");
  const open = parts ? `<${tag} ${parts}` : `<${tag}`;
  return children === "" && tag !== "text" && tag !== "title"
    ? `${open}/>`
    : `${open}>${children}</${tag}>`;
}

export function fmt(value: number): string {
  const out = value.toFixed(3);
  return out === "-0.000" ? "0.000" : out;
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${fmt(width)}" height="${fmt(
      height
    )}" viewBox="0 0 ${fmt(width)} ${fmt(height)}">`,
    ...body,
    "</svg>",
  ].join("\n");
}

/** Same categorical palette as the server-side SVG exporter. */
export const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
  "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

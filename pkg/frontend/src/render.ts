/** SVG markup builders for the canvas and the result charts.
 *
 * Everything here turns plain data into strings — the DOM layer injects the
 * markup and wires events by delegation on data-* attributes.  One rendered
 * `.block` group per diagram block, one `.link` group per link, so the
 * canvas/model correspondence is checkable by counting nodes.
 */

import { BlockJson, DiagramJson, isUnset } from "./interchange.js";
import {
  blockSize,
  inputPos,
  outputPos,
  pathData,
  route,
} from "./routing.js";

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&apos;");
}

export interface RenderOptions {
  selection?: string | null;
  /** Block ids the last diagnostics pointed at. */
  highlights?: Set<string>;
  /** Kind → short label, from the palette. */
  labels?: Map<string, string>;
}

function paramSummary(block: BlockJson): string {
  const parts: string[] = [];
  for (const [name, raw] of Object.entries(block.params)) {
    parts.push(`${name}=${isUnset(raw) ? "%s" : raw}`);
  }
  const text = parts.join("  ");
  return text.length > 26 ? text.slice(0, 25) + "…" : text;
}

function hasUnsetParam(block: BlockJson): boolean {
  return Object.values(block.params).some(isUnset);
}

function renderBlock(block: BlockJson, opts: RenderOptions): string {
  const [x, y] = block.position;
  const { w, h } = blockSize(block);
  const classes = ["block"];
  if (opts.selection === block.id) {
    classes.push("selected");
  }
  if (opts.highlights?.has(block.id)) {
    classes.push("flagged");
  }
  if (hasUnsetParam(block)) {
    classes.push("unset");
  }
  const label = opts.labels?.get(block.kind) ?? block.kind;
  const out: string[] = [
    `<g class="${classes.join(" ")}" data-block-id="${escapeXml(block.id)}">`,
    `<rect x="${x}" y="${y}" width="${w}" height="${h}" rx="6"/>`,
    `<text class="kind" x="${x + w / 2}" y="${y + 18}">${escapeXml(label)}</text>`,
    `<text class="bid" x="${x + w / 2}" y="${y + 33}">${escapeXml(block.id)}</text>`,
  ];
  const summary = paramSummary(block);
  if (summary) {
    out.push(
      `<text class="params" x="${x + w / 2}" y="${y + h - 7}">` +
        `${escapeXml(summary)}</text>`
    );
  }
  for (let i = 0; i < block.n_in; i++) {
    const p = inputPos(block, i);
    out.push(
      `<circle class="port in" data-block="${escapeXml(block.id)}" ` +
        `data-port="in" data-index="${i}" cx="${p.x}" cy="${p.y}" r="5"/>`
    );
  }
  for (let i = 0; i < block.n_out; i++) {
    const p = outputPos(block, i);
    out.push(
      `<circle class="port out" data-block="${escapeXml(block.id)}" ` +
        `data-port="out" data-index="${i}" cx="${p.x}" cy="${p.y}" r="5"/>`
    );
  }
  out.push("</g>");
  return out.join("");
}

export function renderDiagram(doc: DiagramJson, opts: RenderOptions = {}): string {
  const byId = new Map(doc.blocks.map((b) => [b.id, b]));
  const out: string[] = [];
  for (const link of doc.links) {
    const src = byId.get(link.src[0]);
    const dst = byId.get(link.dst[0]);
    if (!src || !dst) {
      continue;
    }
    const d = pathData(route(outputPos(src, link.src[1]), inputPos(dst, link.dst[1])));
    const classes = opts.selection === link.id ? "link selected" : "link";
    out.push(
      `<g class="${classes}" data-link-id="${escapeXml(link.id)}">` +
        `<path class="hit" d="${d}"/><path class="wire" d="${d}"/></g>`
    );
  }
  for (const block of doc.blocks) {
    out.push(renderBlock(block, opts));
  }
  return out.join("\n");
}

// ------------------------------------------------------------------ charts

/** Round-numbered tick positions covering [lo, hi] (1-2-5 ladder). */
export function niceTicks(lo: number, hi: number, want = 5): number[] {
  if (!isFinite(lo) || !isFinite(hi)) {
    return [];
  }
  if (lo === hi) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 1;
    lo -= pad;
    hi += pad;
  }
  const raw = (hi - lo) / Math.max(want, 2);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function fmtTick(v: number): string {
  if (v === 0) {
    return "0";
  }
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) {
    return v.toExponential(1);
  }
  return String(parseFloat(v.toPrecision(5)));
}

export function renderChart(
  name: string,
  times: number[],
  values: number[],
  width = 440,
  height = 180
): string {
  const m = { l: 52, r: 12, t: 24, b: 26 };
  const iw = width - m.l - m.r;
  const ih = height - m.t - m.b;
  let tLo = Math.min(...times);
  let tHi = Math.max(...times);
  if (!isFinite(tLo) || tLo === tHi) {
    tLo -= 0.5;
    tHi += 0.5;
  }
  let yLo = Math.min(...values);
  let yHi = Math.max(...values);
  if (!isFinite(yLo)) {
    yLo = 0;
    yHi = 1;
  }
  if (yLo === yHi) {
    const pad = Math.abs(yLo) > 0 ? Math.abs(yLo) * 0.1 : 0.5;
    yLo -= pad;
    yHi += pad;
  }
  const sx = (t: number) => m.l + ((t - tLo) / (tHi - tLo)) * iw;
  const sy = (v: number) => m.t + ih - ((v - yLo) / (yHi - yLo)) * ih;

  const out: string[] = [
    `<svg class="chart" viewBox="0 0 ${width} ${height}" ` +
      `role="img" aria-label="${escapeXml(name)} over time">`,
    `<text class="title" x="${m.l}" y="15">${escapeXml(name)}</text>`,
  ];
  for (const v of niceTicks(yLo, yHi)) {
    const y = sy(v);
    out.push(
      `<line class="grid" x1="${m.l}" y1="${y}" x2="${width - m.r}" y2="${y}"/>`,
      `<text class="tick y" x="${m.l - 6}" y="${y + 3}">${fmtTick(v)}</text>`
    );
  }
  for (const t of niceTicks(tLo, tHi)) {
    const x = sx(t);
    out.push(
      `<line class="grid" x1="${x}" y1="${m.t}" x2="${x}" y2="${m.t + ih}"/>`,
      `<text class="tick x" x="${x}" y="${height - 8}">${fmtTick(t)}</text>`
    );
  }
  const pts = times
    .map((t, i) => `${sx(t).toFixed(2)},${sy(values[i] ?? 0).toFixed(2)}`)
    .join(" ");
  out.push(
    `<rect class="frame" x="${m.l}" y="${m.t}" width="${iw}" height="${ih}"/>`,
    `<polyline class="trace" points="${pts}"/>`,
    "</svg>"
  );
  return out.join("\n");
}

/** Canvas geometry: block boxes, port anchors, and orthogonal link routes.
 *
 * Routes are cosmetic — only the endpoints (block positions + port ordinals)
 * are persisted, so the path is recomputed from scratch on every render.
 */

import { BlockJson } from "./interchange.js";

export interface Pt {
  x: number;
  y: number;
}

export const BLOCK_W = 120;
export const BLOCK_MIN_H = 48;
export const PORT_PITCH = 22;
const STUB = 18;

export function blockSize(block: BlockJson): { w: number; h: number } {
  const rows = Math.max(block.n_in, block.n_out, 1);
  return { w: BLOCK_W, h: Math.max(BLOCK_MIN_H, rows * PORT_PITCH + 14) };
}

function portY(block: BlockJson, count: number, index: number): number {
  const { h } = blockSize(block);
  return block.position[1] + (h * (index + 1)) / (count + 1);
}

export function inputPos(block: BlockJson, index: number): Pt {
  return { x: block.position[0], y: portY(block, block.n_in, index) };
}

export function outputPos(block: BlockJson, index: number): Pt {
  const { w } = blockSize(block);
  return { x: block.position[0] + w, y: portY(block, block.n_out, index) };
}

/** Orthogonal polyline from an output anchor to an input anchor.
 *
 * Forward runs (target to the right) take three segments through a vertical
 * midline; backward runs (feedback) loop around with five.  Consecutive
 * points always share an x or a y.
 */
export function route(a: Pt, b: Pt): Pt[] {
  const exitX = a.x + STUB;
  const entryX = b.x - STUB;
  if (a.y === b.y && exitX <= entryX) {
    return [a, b];
  }
  if (exitX <= entryX) {
    const midX = (exitX + entryX) / 2;
    return [a, { x: midX, y: a.y }, { x: midX, y: b.y }, b];
  }
  const midY = (a.y + b.y) / 2;
  return [
    a,
    { x: exitX, y: a.y },
    { x: exitX, y: midY },
    { x: entryX, y: midY },
    { x: entryX, y: b.y },
    b,
  ];
}

export function pathData(points: Pt[]): string {
  return points
    .map((p, i) => `${i === 0 ? "M" : "L"} ${p.x} ${p.y}`)
    .join(" ");
}

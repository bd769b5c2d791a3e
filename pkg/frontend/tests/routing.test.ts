import { describe, expect, it } from "vitest";

import { BlockJson } from "../src/interchange.js";
import {
  blockSize,
  inputPos,
  outputPos,
  pathData,
  route,
} from "../src/routing.js";

function blockAt(x: number, y: number, nIn = 1, nOut = 1): BlockJson {
  return {
    id: "b",
    kind: "GAINBLK",
    position: [x, y],
    n_in: nIn,
    n_out: nOut,
    params: {},
    attrs: {},
  };
}

function assertOrthogonal(points: { x: number; y: number }[]): void {
  expect(points.length).toBeGreaterThanOrEqual(2);
  for (let i = 1; i < points.length; i++) {
    const a = points[i - 1]!;
    const b = points[i]!;
    const straight = a.x === b.x || a.y === b.y;
    expect(straight, `segment ${i} is diagonal: ${JSON.stringify([a, b])}`).toBe(true);
  }
}

describe("port anchors", () => {
  it("inputs sit on the left edge, outputs on the right", () => {
    const b = blockAt(100, 40);
    const { w } = blockSize(b);
    expect(inputPos(b, 0).x).toBe(100);
    expect(outputPos(b, 0).x).toBe(100 + w);
  });

  it("multiple ports are spread without overlap inside the box", () => {
    const b = blockAt(0, 0, 3, 1);
    const ys = [0, 1, 2].map((i) => inputPos(b, i).y);
    expect(ys[0]!).toBeLessThan(ys[1]!);
    expect(ys[1]!).toBeLessThan(ys[2]!);
    const { h } = blockSize(b);
    for (const y of ys) {
      expect(y).toBeGreaterThan(0);
      expect(y).toBeLessThan(h);
    }
  });

  it("tall port stacks grow the box", () => {
    expect(blockSize(blockAt(0, 0, 5, 1)).h).toBeGreaterThan(
      blockSize(blockAt(0, 0, 1, 1)).h
    );
  });
});

describe("orthogonal routing", () => {
  it("a forward run is a straight line when aligned", () => {
    const pts = route({ x: 0, y: 50 }, { x: 200, y: 50 });
    expect(pts).toEqual([
      { x: 0, y: 50 },
      { x: 200, y: 50 },
    ]);
  });

  it("a forward run with offset uses three segments", () => {
    const pts = route({ x: 0, y: 0 }, { x: 200, y: 100 });
    expect(pts).toHaveLength(4);
    assertOrthogonal(pts);
    expect(pts[0]).toEqual({ x: 0, y: 0 });
    expect(pts[pts.length - 1]).toEqual({ x: 200, y: 100 });
  });

  it("a feedback run loops around with five segments", () => {
    const pts = route({ x: 300, y: 0 }, { x: 0, y: 10 });
    expect(pts).toHaveLength(6);
    assertOrthogonal(pts);
    expect(pts[0]).toEqual({ x: 300, y: 0 });
    expect(pts[pts.length - 1]).toEqual({ x: 0, y: 10 });
  });

  it("every generated route is orthogonal", () => {
    for (let i = 0; i < 50; i++) {
      const a = { x: (i * 37) % 500, y: (i * 91) % 300 };
      const b = { x: (i * 53) % 500, y: (i * 17) % 300 };
      assertOrthogonal(route(a, b));
    }
  });
});

describe("pathData", () => {
  it("emits one M and L per following point", () => {
    expect(pathData([{ x: 1, y: 2 }, { x: 3, y: 2 }, { x: 3, y: 9 }])).toBe(
      "M 1 2 L 3 2 L 3 9"
    );
  });
});

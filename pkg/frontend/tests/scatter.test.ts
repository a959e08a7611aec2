import { describe, expect, it } from "vitest";

import {
  INTERACTIVE_POINT_BUDGET,
  decimationStride,
  fitTransform,
  panBy,
  toScreen,
  zoomAt,
} from "../src/scatter.js";

describe("decimationStride", () => {
  it("keeps everything under the budget", () => {
    expect(decimationStride(100, 1000)).toBe(1);
    expect(decimationStride(1000, 1000)).toBe(1);
  });

  it("chooses the smallest stride meeting the budget", () => {
    const n = 100000;
    const stride = decimationStride(n, INTERACTIVE_POINT_BUDGET);
    expect(Math.ceil(n / stride)).toBeLessThanOrEqual(INTERACTIVE_POINT_BUDGET);
    expect(Math.ceil(n / (stride - 1))).toBeGreaterThan(INTERACTIVE_POINT_BUDGET);
  });

  it("is deterministic", () => {
    expect(decimationStride(123457, 30000)).toBe(decimationStride(123457, 30000));
  });
});

describe("fitTransform", () => {
  const bbox = { xmin: 0, xmax: 2, ymin: 0, ymax: 1 };

  it("centers the data box in the canvas", () => {
    const t = fitTransform(bbox, 400, 300, 10);
    const [cx, cy] = toScreen(t, 1, 0.5); // data centre
    expect(cx).toBeCloseTo(200, 6);
    expect(cy).toBeCloseTo(150, 6);
  });

  it("keeps every corner inside the padded canvas", () => {
    const t = fitTransform(bbox, 400, 300, 10);
    for (const [x, y] of [[0, 0], [2, 0], [0, 1], [2, 1]] as const) {
      const [sx, sy] = toScreen(t, x, y);
      expect(sx).toBeGreaterThanOrEqual(10 - 1e-9);
      expect(sx).toBeLessThanOrEqual(390 + 1e-9);
      expect(sy).toBeGreaterThanOrEqual(10 - 1e-9);
      expect(sy).toBeLessThanOrEqual(290 + 1e-9);
    }
  });

  it("flips the y axis so data y grows upward", () => {
    const t = fitTransform(bbox, 400, 300, 10);
    const [, top] = toScreen(t, 1, 1);
    const [, bottom] = toScreen(t, 1, 0);
    expect(top).toBeLessThan(bottom);
  });

  it("survives a degenerate single-point box", () => {
    const t = fitTransform({ xmin: 3, xmax: 3, ymin: 4, ymax: 4 }, 100, 100);
    const [sx, sy] = toScreen(t, 3, 4);
    expect(Number.isFinite(sx) && Number.isFinite(sy)).toBe(true);
  });
});

describe("zoom and pan", () => {
  const t0 = fitTransform({ xmin: 0, xmax: 1, ymin: 0, ymax: 1 }, 200, 200);

  it("zoomAt keeps the cursor's data point fixed on screen", () => {
    const [sx, sy] = toScreen(t0, 0.3, 0.7);
    const t1 = zoomAt(t0, sx, sy, 1.8);
    const [sx1, sy1] = toScreen(t1, 0.3, 0.7);
    expect(sx1).toBeCloseTo(sx, 9);
    expect(sy1).toBeCloseTo(sy, 9);
    expect(t1.scale).toBeCloseTo(t0.scale * 1.8, 9);
  });

  it("panBy shifts screen coordinates by the pixel delta", () => {
    const [sx, sy] = toScreen(t0, 0.5, 0.5);
    const t1 = panBy(t0, 30, -12);
    const [sx1, sy1] = toScreen(t1, 0.5, 0.5);
    expect(sx1 - sx).toBeCloseTo(30, 9);
    expect(sy1 - sy).toBeCloseTo(-12, 9);
  });
});

describe("interactive frame budget", () => {
  it("transforms and culls a decimated 100k cloud well under 100 ms", () => {
    const n = 100000;
    const coords = new Float64Array(2 * n);
    for (let i = 0; i < 2 * n; i++) coords[i] = Math.random();
    const t = fitTransform({ xmin: 0, xmax: 1, ymin: 0, ymax: 1 }, 520, 440);
    const stride = decimationStride(n, INTERACTIVE_POINT_BUDGET);

    const start = performance.now();
    let visible = 0;
    for (let i = 0; i < n; i += stride) {
      const sx = t.scale * coords[2 * i] + t.tx;
      const sy = -t.scale * coords[2 * i + 1] + t.ty;
      if (sx >= -4 && sx <= 524 && sy >= -4 && sy <= 444) visible++;
    }
    const elapsed = performance.now() - start;
    expect(visible).toBeGreaterThan(0);
    expect(elapsed).toBeLessThan(100);
  });
});

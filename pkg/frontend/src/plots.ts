/** Small-multiple line plots for the curve artifacts.
 *
 * Everything geometric is computed here as pure data (paths, ticks,
 * domains) and rendered as inline SVG by the app; that keeps the
 * plotting logic testable without a DOM.
 */

import type { CurvesPayload } from "./types.js";

export interface PlotGroup {
  family: string;
  names: string[];
}

/** Group curve names by their leading statistic token, keeping payload
 * order inside each group (K.REP, K.REP.T, ... under "K"). */
export function groupCurves(names: string[]): PlotGroup[] {
  const groups: PlotGroup[] = [];
  const byFamily = new Map<string, string[]>();
  for (const name of names) {
    const family = name.split(".")[0];
    let bucket = byFamily.get(family);
    if (!bucket) {
      bucket = [];
      byFamily.set(family, bucket);
      groups.push({ family, names: bucket });
    }
    bucket.push(name);
  }
  return groups;
}

export type Segment = [number, number][];

/** Split a series into contiguous finite runs; nulls and NaN become
 * gaps in the drawn line rather than interpolated spans. */
export function seriesSegments(
  r: number[],
  values: (number | null)[],
): Segment[] {
  const segments: Segment[] = [];
  let current: Segment = [];
  for (let i = 0; i < r.length; i++) {
    const v = values[i];
    if (v === null || v === undefined || !Number.isFinite(v)) {
      if (current.length > 0) segments.push(current);
      current = [];
    } else {
      current.push([r[i], v]);
    }
  }
  if (current.length > 0) segments.push(current);
  return segments;
}

export interface PlotSpec {
  name: string;
  estimatePath: string;
  theoreticalPath: string;
  xDomain: [number, number];
  yDomain: [number, number];
  xTicks: number[];
  yTicks: number[];
  empty: boolean;
}

function finiteExtent(segments: Segment[]): [number, number] | null {
  let lo = Infinity;
  let hi = -Infinity;
  for (const seg of segments) {
    for (const [, v] of seg) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  return lo <= hi ? [lo, hi] : null;
}

function ticks(lo: number, hi: number, n = 3): number[] {
  if (!(hi > lo)) return [lo];
  const out: number[] = [];
  for (let i = 0; i <= n; i++) out.push(lo + ((hi - lo) * i) / n);
  return out;
}

function pathFor(
  segments: Segment[],
  xDomain: [number, number],
  yDomain: [number, number],
  width: number,
  height: number,
): string {
  const [x0, x1] = xDomain;
  const [y0, y1] = yDomain;
  const sx = (x: number) => ((x - x0) / (x1 - x0 || 1)) * width;
  const sy = (y: number) => height - ((y - y0) / (y1 - y0 || 1)) * height;
  const parts: string[] = [];
  for (const seg of segments) {
    seg.forEach(([x, y], i) => {
      parts.push(`${i === 0 ? "M" : "L"}${sx(x).toFixed(1)},${sy(y).toFixed(1)}`);
    });
  }
  return parts.join("");
}

/** Geometry for one statistic's plot: solid estimate, dashed reference. */
export function plotSpec(
  name: string,
  payload: CurvesPayload,
  width = 220,
  height = 120,
): PlotSpec {
  const curve = payload.curves[name];
  const est = seriesSegments(payload.r, curve.estimate);
  const theo = seriesSegments(payload.r, curve.theoretical);
  const xDomain: [number, number] = [
    payload.r[0],
    payload.r[payload.r.length - 1],
  ];
  const extents = [finiteExtent(est), finiteExtent(theo)].filter(
    (e): e is [number, number] => e !== null,
  );
  if (extents.length === 0) {
    return {
      name,
      estimatePath: "",
      theoreticalPath: "",
      xDomain,
      yDomain: [0, 1],
      xTicks: ticks(xDomain[0], xDomain[1]),
      yTicks: [0, 1],
      empty: true,
    };
  }
  let lo = Math.min(...extents.map((e) => e[0]));
  let hi = Math.max(...extents.map((e) => e[1]));
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const yDomain: [number, number] = [lo, hi];
  return {
    name,
    estimatePath: pathFor(est, xDomain, yDomain, width, height),
    theoreticalPath: pathFor(theo, xDomain, yDomain, width, height),
    xDomain,
    yDomain,
    xTicks: ticks(xDomain[0], xDomain[1]),
    yTicks: ticks(lo, hi),
    empty: false,
  };
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(0);
  if (a < 1) return v.toFixed(2);
  return a >= 100 ? v.toFixed(0) : v.toFixed(1);
}

import { describe, expect, it } from "vitest";

import { parsePreview } from "../src/csv.js";

const SAMPLE = [
  "x,y,type",
  "0.1,0.2,tumor",
  "0.5,0.9,immune",
  "0.3,0.4,tumor",
  "0.7,0.1,stromal",
].join("\n");

describe("parsePreview", () => {
  it("detects and skips a header row", () => {
    const p = parsePreview(SAMPLE, false);
    expect(p.rowCount).toBe(4);
    expect(p.skippedRows).toBe(0);
  });

  it("accepts headerless input", () => {
    const p = parsePreview("0.1,0.2,a\n0.3,0.4,b\n", false);
    expect(p.rowCount).toBe(2);
    expect(p.types.map((t) => t.label)).toEqual(["a", "b"]);
  });

  it("counts points per type with labels sorted", () => {
    const p = parsePreview(SAMPLE, false);
    expect(p.types.map((t) => [t.label, t.count])).toEqual([
      ["immune", 1],
      ["stromal", 1],
      ["tumor", 2],
    ]);
  });

  it("assigns each type a distinct color", () => {
    const p = parsePreview(SAMPLE, false);
    const colors = new Set(p.types.map((t) => t.color));
    expect(colors.size).toBe(3);
  });

  it("skips malformed rows without failing", () => {
    const text = "x,y,type\n0.1,0.2,a\nbroken line\n0.3,oops,b\n0.4,0.5,\n0.6,0.7,c\n";
    const p = parsePreview(text, false);
    expect(p.rowCount).toBe(2);
    expect(p.skippedRows).toBe(3);
  });

  it("drops the final line of a truncated slice", () => {
    const text = "0.1,0.2,a\n0.3,0.4,b\n0.5,0.6,c";
    const full = parsePreview(text, false);
    const cut = parsePreview(text, true);
    expect(full.rowCount).toBe(3);
    expect(cut.rowCount).toBe(2);
    expect(cut.truncated).toBe(true);
  });

  it("computes the bounding box of kept points", () => {
    const p = parsePreview(SAMPLE, false);
    expect(p.bbox).toEqual({ xmin: 0.1, xmax: 0.7, ymin: 0.1, ymax: 0.9 });
  });

  it("stores coordinates interleaved in row order", () => {
    const p = parsePreview("1,2,a\n3,4,b\n", false);
    expect([...p.coords]).toEqual([1, 2, 3, 4]);
    expect(p.types[p.typeIndex[0]].label).toBe("a");
    expect(p.types[p.typeIndex[1]].label).toBe("b");
  });

  it("handles empty input with a unit fallback box", () => {
    const p = parsePreview("", false);
    expect(p.rowCount).toBe(0);
    expect(p.types).toEqual([]);
    expect(p.bbox).toEqual({ xmin: 0, xmax: 1, ymin: 0, ymax: 1 });
  });
});

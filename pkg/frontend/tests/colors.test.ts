import { describe, expect, it } from "vitest";

import { PALETTE, assignColors } from "../src/colors.js";

describe("assignColors", () => {
  it("assigns by sorted label, independent of input order", () => {
    const a = assignColors(["tumor", "immune", "stromal"]);
    const b = assignColors(["stromal", "tumor", "immune", "tumor"]);
    expect([...a.entries()]).toEqual([...b.entries()]);
    expect([...a.keys()]).toEqual(["immune", "stromal", "tumor"]);
  });

  it("gives distinct colors to the first ten labels", () => {
    const labels = Array.from({ length: 10 }, (_, i) => `t${i}`);
    const colors = new Set(assignColors(labels).values());
    expect(colors.size).toBe(10);
  });

  it("cycles the palette beyond ten labels", () => {
    const labels = Array.from({ length: 12 }, (_, i) =>
      `t${String(i).padStart(2, "0")}`,
    );
    const map = assignColors(labels);
    expect(map.get("t10")).toBe(PALETTE[0]);
    expect(map.get("t11")).toBe(PALETTE[1]);
  });
});

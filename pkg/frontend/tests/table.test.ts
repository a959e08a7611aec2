import { describe, expect, it } from "vitest";

import { formatValue, parseFeaturesCsv, sortRows } from "../src/table.js";

describe("parseFeaturesCsv", () => {
  it("pairs header names with first-row values", () => {
    const rows = parseFeaturesCsv("a,b,c\n1.5,,0.25\n");
    expect(rows).toEqual([
      { name: "a", value: 1.5 },
      { name: "b", value: null },
      { name: "c", value: 0.25 },
    ]);
  });

  it("returns nothing for a header-only artifact", () => {
    expect(parseFeaturesCsv("a,b\n")).toEqual([]);
  });
});

describe("sortRows", () => {
  const rows = parseFeaturesCsv("b,a,c,d\n2,,1,-5\n");

  it("sorts by name both ways", () => {
    expect(sortRows(rows, "name", true).map((r) => r.name)).toEqual(
      ["a", "b", "c", "d"],
    );
    expect(sortRows(rows, "name", false).map((r) => r.name)).toEqual(
      ["d", "c", "b", "a"],
    );
  });

  it("sorts by value keeping missing values last either way", () => {
    expect(sortRows(rows, "value", true).map((r) => r.name)).toEqual(
      ["d", "c", "b", "a"],
    );
    expect(sortRows(rows, "value", false).map((r) => r.name)).toEqual(
      ["b", "c", "d", "a"],
    );
  });

  it("does not mutate its input", () => {
    const before = rows.map((r) => r.name);
    sortRows(rows, "value", true);
    expect(rows.map((r) => r.name)).toEqual(before);
  });
});

describe("formatValue", () => {
  it("renders missing values as an em dash", () => {
    expect(formatValue(null)).toBe("—");
    expect(formatValue(NaN)).toBe("—");
  });

  it("keeps friendly numbers plain and extremes exponential", () => {
    expect(formatValue(0)).toBe("0");
    expect(formatValue(0.25)).toBe("0.25");
    expect(formatValue(1234567)).toBe("1.2346e+6");
    expect(formatValue(0.00001)).toBe("1.0000e-5");
  });
});

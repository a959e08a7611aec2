/** Deterministic color assignment: sorted type labels walk a fixed
 * palette, so the same file always shows the same colors regardless of
 * row order. */
export const PALETTE = [
    "#d62728", // red
    "#1f77b4", // blue
    "#2ca02c", // green
    "#ff7f0e", // orange
    "#9467bd", // purple
    "#8c564b", // brown
    "#e377c2", // pink
    "#17becf", // cyan
    "#bcbd22", // olive
    "#7f7f7f", // gray
];
/** Map each distinct label to a palette color, keyed in sorted order. */
export function assignColors(labels) {
    const distinct = [...new Set(labels)].sort();
    return new Map(distinct.map((l, i) => [l, PALETTE[i % PALETTE.length]]));
}

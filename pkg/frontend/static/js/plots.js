/** Small-multiple line plots for the curve artifacts.
 *
 * Everything geometric is computed here as pure data (paths, ticks,
 * domains) and rendered as inline SVG by the app; that keeps the
 * plotting logic testable without a DOM.
 */
/** Group curve names by their leading statistic token, keeping payload
 * order inside each group (K.REP, K.REP.T, ... under "K"). */
export function groupCurves(names) {
    const groups = [];
    const byFamily = new Map();
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
/** Split a series into contiguous finite runs; nulls and NaN become
 * gaps in the drawn line rather than interpolated spans. */
export function seriesSegments(r, values) {
    const segments = [];
    let current = [];
    for (let i = 0; i < r.length; i++) {
        const v = values[i];
        if (v === null || v === undefined || !Number.isFinite(v)) {
            if (current.length > 0)
                segments.push(current);
            current = [];
        }
        else {
            current.push([r[i], v]);
        }
    }
    if (current.length > 0)
        segments.push(current);
    return segments;
}
function finiteExtent(segments) {
    let lo = Infinity;
    let hi = -Infinity;
    for (const seg of segments) {
        for (const [, v] of seg) {
            if (v < lo)
                lo = v;
            if (v > hi)
                hi = v;
        }
    }
    return lo <= hi ? [lo, hi] : null;
}
function ticks(lo, hi, n = 3) {
    if (!(hi > lo))
        return [lo];
    const out = [];
    for (let i = 0; i <= n; i++)
        out.push(lo + ((hi - lo) * i) / n);
    return out;
}
function pathFor(segments, xDomain, yDomain, width, height) {
    const [x0, x1] = xDomain;
    const [y0, y1] = yDomain;
    const sx = (x) => ((x - x0) / (x1 - x0 || 1)) * width;
    const sy = (y) => height - ((y - y0) / (y1 - y0 || 1)) * height;
    const parts = [];
    for (const seg of segments) {
        seg.forEach(([x, y], i) => {
            parts.push(`${i === 0 ? "M" : "L"}${sx(x).toFixed(1)},${sy(y).toFixed(1)}`);
        });
    }
    return parts.join("");
}
/** Geometry for one statistic's plot: solid estimate, dashed reference. */
export function plotSpec(name, payload, width = 220, height = 120) {
    const curve = payload.curves[name];
    const est = seriesSegments(payload.r, curve.estimate);
    const theo = seriesSegments(payload.r, curve.theoretical);
    const xDomain = [
        payload.r[0],
        payload.r[payload.r.length - 1],
    ];
    const extents = [finiteExtent(est), finiteExtent(theo)].filter((e) => e !== null);
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
    const yDomain = [lo, hi];
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
export function formatTick(v) {
    if (v === 0)
        return "0";
    const a = Math.abs(v);
    if (a >= 1000 || a < 0.01)
        return v.toExponential(0);
    if (a < 1)
        return v.toFixed(2);
    return a >= 100 ? v.toFixed(0) : v.toFixed(1);
}

/** Lenient client-side CSV preview.
 *
 * The server is the authority on validity; the preview only needs type
 * counts and drawable coordinates, so malformed rows are counted and
 * skipped rather than rejected. Only the first 4 MB of the file is ever
 * read (matching the service upload cap), and the last line of a
 * truncated slice is dropped because it may be cut mid-row.
 */
import { assignColors } from "./colors.js";
function looksNumeric(field) {
    return field.trim() !== "" && Number.isFinite(Number(field));
}
export function parsePreview(text, truncated) {
    let lines = text.split(/\r?\n/);
    if (truncated && lines.length > 0) {
        lines = lines.slice(0, -1);
    }
    let start = 0;
    if (lines.length > 0) {
        const first = lines[0].split(",");
        if (first.length >= 2 && !(looksNumeric(first[0]) && looksNumeric(first[1]))) {
            start = 1; // header row
        }
    }
    const xs = [];
    const ys = [];
    const rawLabels = [];
    let skipped = 0;
    for (let i = start; i < lines.length; i++) {
        const line = lines[i].trim();
        if (line === "")
            continue;
        const parts = line.split(",");
        const x = Number(parts[0]);
        const y = Number(parts[1]);
        const label = (parts[2] ?? "").trim();
        if (parts.length < 3 || !Number.isFinite(x) || !Number.isFinite(y) || label === "") {
            skipped++;
            continue;
        }
        xs.push(x);
        ys.push(y);
        rawLabels.push(label);
    }
    const colorOf = assignColors(rawLabels);
    const labels = [...colorOf.keys()]; // sorted by assignColors
    const indexOf = new Map(labels.map((l, i) => [l, i]));
    const counts = new Array(labels.length).fill(0);
    const coords = new Float64Array(xs.length * 2);
    const typeIndex = new Uint16Array(xs.length);
    let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
    for (let i = 0; i < xs.length; i++) {
        coords[2 * i] = xs[i];
        coords[2 * i + 1] = ys[i];
        const t = indexOf.get(rawLabels[i]);
        typeIndex[i] = t;
        counts[t]++;
        if (xs[i] < xmin)
            xmin = xs[i];
        if (xs[i] > xmax)
            xmax = xs[i];
        if (ys[i] < ymin)
            ymin = ys[i];
        if (ys[i] > ymax)
            ymax = ys[i];
    }
    if (xs.length === 0) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    const types = labels.map((label, i) => ({
        label,
        count: counts[i],
        color: colorOf.get(label),
    }));
    return {
        coords,
        typeIndex,
        types,
        rowCount: xs.length,
        skippedRows: skipped,
        truncated,
        bbox: { xmin, xmax, ymin, ymax },
    };
}
/** Read at most `cap` bytes of the file and parse them. */
export async function previewFile(file, cap) {
    const truncated = file.size > cap;
    const text = await file.slice(0, cap).text();
    return parsePreview(text, truncated);
}

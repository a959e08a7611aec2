/** Scalar feature table: parse the features.csv artifact and support
 * client-side sorting. The artifact itself is never modified; downloads
 * always stream the service's bytes. */
export function parseFeaturesCsv(text) {
    const lines = text.split(/\r?\n/).filter((l) => l !== "");
    if (lines.length < 2)
        return [];
    const names = lines[0].split(",");
    const cells = lines[1].split(",");
    return names.map((name, i) => {
        const raw = cells[i] ?? "";
        return { name, value: raw === "" ? null : Number(raw) };
    });
}
export function sortRows(rows, key, ascending) {
    const out = [...rows];
    out.sort((a, b) => {
        let cmp;
        if (key === "name") {
            cmp = a.name < b.name ? -1 : a.name > b.name ? 1 : 0;
        }
        else {
            // missing values sort to the end in either direction
            if (a.value === null && b.value === null)
                cmp = 0;
            else if (a.value === null)
                return 1;
            else if (b.value === null)
                return -1;
            else
                cmp = a.value - b.value;
        }
        return ascending ? cmp : -cmp;
    });
    return out;
}
export function formatValue(value) {
    if (value === null || Number.isNaN(value))
        return "—";
    if (value === 0)
        return "0";
    const a = Math.abs(value);
    if (a >= 1e6 || a < 1e-4)
        return value.toExponential(4);
    return String(Math.round(value * 1e6) / 1e6);
}

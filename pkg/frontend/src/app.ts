/** Application wiring: upload, preview, configure, submit, poll, and
 * render results. All analysis happens server-side; this file only
 * moves state between the DOM and the /api/v1 endpoints. */

import {
  ApiError,
  artifactUrl,
  fetchArtifactJson,
  fetchArtifactText,
  pollJob,
  submitJob,
  type PollHandle,
} from "./api.js";
import { previewFile } from "./csv.js";
import { groupCurves, plotSpec, formatTick } from "./plots.js";
import { ScatterView } from "./scatter.js";
import {
  canSubmit,
  emptyState,
  fromQuery,
  roleOf,
  toggleFamily,
  toggleType,
  toQuery,
} from "./state.js";
import {
  formatValue,
  parseFeaturesCsv,
  sortRows,
  type ScalarRow,
  type SortKey,
} from "./table.js";
import {
  FAMILIES,
  PREVIEW_BYTE_CAP,
  type CurvesPayload,
  type JobStatus,
  type ParsedPreview,
  type SessionState,
} from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const state: SessionState = { ...emptyState(), ...fromQuery(location.search) };
let file: File | null = null;
let preview: ParsedPreview | null = null;
let scatter: ScatterView | null = null;
let poller: PollHandle | null = null;
let scalarRows: ScalarRow[] = [];
let sortKey: SortKey = "name";
let sortAscending = true;

function syncUrl(): void {
  history.replaceState(null, "", location.pathname + toQuery(state));
}

function show(id: string, visible: boolean): void {
  $(id).classList.toggle("hidden", !visible);
}

function setHint(text: string): void {
  const el = $("type-hint");
  el.textContent = text;
  el.classList.toggle("hidden", text === "");
}

function renderLegend(): void {
  if (!preview) return;
  const legend = $("legend");
  legend.replaceChildren();
  for (const t of preview.types) {
    const btn = document.createElement("button");
    btn.className = "type-chip";
    btn.classList.toggle("chip-selected", state.selectedTypes.includes(t.label));
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = t.color;
    btn.append(swatch, ` ${t.label} (${t.count})`);
    const role = roleOf(state.selectedTypes, t.label);
    if (role) {
      const badge = document.createElement("span");
      badge.className = "role-badge";
      badge.textContent = role;
      btn.append(badge);
    }
    btn.addEventListener("click", () => {
      const result = toggleType(state.selectedTypes, t.label);
      if (result.blocked) {
        setHint("up to three types can be selected; deselect one first");
        return;
      }
      setHint("");
      state.selectedTypes = result.selected;
      syncUrl();
      renderLegend();
      renderSubmit();
      scatter?.setSelection(state.selectedTypes);
    });
    legend.appendChild(btn);
  }
}

function renderFamilies(): void {
  const holder = $("families");
  holder.replaceChildren();
  for (const fam of FAMILIES) {
    const label = document.createElement("label");
    label.className = "family-choice";
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = state.families.includes(fam);
    box.addEventListener("change", () => {
      state.families = toggleFamily(state.families, fam);
      syncUrl();
      renderSubmit();
    });
    label.append(box, ` ${fam}`);
    holder.appendChild(label);
  }
}

function renderSubmit(): void {
  const btn = $<HTMLButtonElement>("submit");
  btn.disabled = !canSubmit(state);
  const roles = state.selectedTypes
    .map((t, i) => `${["T", "I", "S"][i]}=${t}`)
    .join(", ");
  $("selection-summary").textContent =
    state.selectedTypes.length === 0
      ? "select 1–3 types from the legend"
      : `roles: ${roles}`;
}

function setError(id: string, message: string): void {
  const panel = $(id);
  panel.textContent = message;
  panel.classList.toggle("hidden", message === "");
}

async function onFileChosen(chosen: File): Promise<void> {
  file = chosen;
  state.fileName = chosen.name;
  state.fileSize = chosen.size;
  state.jobId = null;
  setError("submit-error", "");
  show("results", false);
  show("progress", false);

  preview = await previewFile(chosen, PREVIEW_BYTE_CAP);
  const known = new Set(preview.types.map((t) => t.label));
  state.selectedTypes = state.selectedTypes.filter((t) => known.has(t));
  syncUrl();

  const meta = [
    `${chosen.name}, ${(chosen.size / 1024).toFixed(0)} kB`,
    `${preview.rowCount} points, ${preview.types.length} types`,
  ];
  if (preview.truncated) {
    meta.push("preview shows the first 4 MB only");
  }
  if (preview.skippedRows > 0) {
    meta.push(`${preview.skippedRows} unparseable rows skipped in preview`);
  }
  $("file-meta").textContent = meta.join(" · ");

  if (!scatter) {
    scatter = new ScatterView($<HTMLCanvasElement>("cloud"));
  }
  scatter.setData(preview);
  scatter.setSelection(state.selectedTypes);
  show("workbench", true);
  renderLegend();
  renderFamilies();
  renderSubmit();
}

async function submit(): Promise<void> {
  if (!file) return;
  setError("submit-error", "");
  const btn = $<HTMLButtonElement>("submit");
  btn.disabled = true;
  try {
    const jobId = await submitJob(file, file.name, {
      selected_types: state.selectedTypes,
      feature_families: state.families,
    });
    state.jobId = jobId;
    syncUrl();
    watchJob(jobId);
  } catch (err) {
    // 413 and 422 carry the service's own message
    const msg = err instanceof ApiError ? err.message : String(err);
    setError("submit-error", msg);
    btn.disabled = !canSubmit(state);
  }
}

function watchJob(jobId: string): void {
  poller?.cancel();
  show("progress", true);
  show("results", false);
  $("job-id").textContent = jobId;
  setError("job-error", "");

  poller = pollJob(jobId, (status) => {
    $<HTMLProgressElement>("job-progress").value = status.progress;
    $("job-state").textContent = status.state;
  });
  poller.done
    .then(async (status) => {
      show("progress", false);
      if (status.state === "failed") {
        setError("job-error", status.error ?? "the job failed");
        show("results", false);
        return;
      }
      await renderResults(status);
    })
    .catch((err) => {
      show("progress", false);
      const msg = err instanceof ApiError ? err.message : String(err);
      setError("job-error", msg);
    });
}

function renderScalarTable(): void {
  const body = $("scalar-body");
  body.replaceChildren();
  for (const row of sortRows(scalarRows, sortKey, sortAscending)) {
    const tr = document.createElement("tr");
    const name = document.createElement("td");
    name.textContent = row.name;
    const value = document.createElement("td");
    value.textContent = formatValue(row.value);
    value.className = "num";
    tr.append(name, value);
    body.appendChild(tr);
  }
}

function svgPlot(name: string, payload: CurvesPayload): SVGSVGElement {
  const W = 220;
  const H = 120;
  const PAD = { left: 34, right: 6, top: 16, bottom: 18 };
  const spec = plotSpec(name, payload, W, H);
  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("viewBox", `0 0 ${W + PAD.left + PAD.right} ${H + PAD.top + PAD.bottom}`);
  svg.setAttribute("class", "plot");

  const g = document.createElementNS(ns, "g");
  g.setAttribute("transform", `translate(${PAD.left},${PAD.top})`);
  svg.appendChild(g);

  const title = document.createElementNS(ns, "text");
  title.setAttribute("x", "0");
  title.setAttribute("y", "-5");
  title.setAttribute("class", "plot-title");
  title.textContent = name;
  g.appendChild(title);

  const frame = document.createElementNS(ns, "rect");
  frame.setAttribute("width", String(W));
  frame.setAttribute("height", String(H));
  frame.setAttribute("class", "plot-frame");
  g.appendChild(frame);

  if (spec.empty) {
    const note = document.createElementNS(ns, "text");
    note.setAttribute("x", String(W / 2));
    note.setAttribute("y", String(H / 2));
    note.setAttribute("class", "plot-empty");
    note.setAttribute("text-anchor", "middle");
    note.textContent = "no finite values";
    g.appendChild(note);
    return svg;
  }

  if (spec.theoreticalPath !== "") {
    const theo = document.createElementNS(ns, "path");
    theo.setAttribute("d", spec.theoreticalPath);
    theo.setAttribute("class", "line-theoretical");
    g.appendChild(theo);
  }
  const est = document.createElementNS(ns, "path");
  est.setAttribute("d", spec.estimatePath);
  est.setAttribute("class", "line-estimate");
  g.appendChild(est);

  for (const tick of spec.yTicks) {
    const y = H - ((tick - spec.yDomain[0]) / (spec.yDomain[1] - spec.yDomain[0])) * H;
    const label = document.createElementNS(ns, "text");
    label.setAttribute("x", "-4");
    label.setAttribute("y", String(y + 3));
    label.setAttribute("class", "tick-label");
    label.setAttribute("text-anchor", "end");
    label.textContent = formatTick(tick);
    g.appendChild(label);
  }
  for (const tick of spec.xTicks) {
    const x = ((tick - spec.xDomain[0]) / (spec.xDomain[1] - spec.xDomain[0] || 1)) * W;
    const label = document.createElementNS(ns, "text");
    label.setAttribute("x", String(x));
    label.setAttribute("y", String(H + 13));
    label.setAttribute("class", "tick-label");
    label.setAttribute("text-anchor", "middle");
    label.textContent = formatTick(tick);
    g.appendChild(label);
  }
  const xAxis = document.createElementNS(ns, "text");
  xAxis.setAttribute("x", String(W));
  xAxis.setAttribute("y", String(H + 13));
  xAxis.setAttribute("class", "tick-label");
  xAxis.setAttribute("text-anchor", "end");
  xAxis.textContent = "r";
  g.appendChild(xAxis);
  return svg;
}

async function renderResults(status: JobStatus): Promise<void> {
  const jobId = status.job_id;

  const downloads = $("downloads");
  downloads.replaceChildren();
  for (const name of ["features.csv", "curves.json", "diagram.csv", "manifest.json"]) {
    const a = document.createElement("a");
    a.href = artifactUrl(jobId, name);
    a.textContent = name;
    a.setAttribute("download", name);
    a.className = "download-link";
    downloads.appendChild(a);
  }

  const [featuresText, curves] = await Promise.all([
    fetchArtifactText(jobId, "features.csv"),
    fetchArtifactJson<CurvesPayload>(jobId, "curves.json"),
  ]);

  scalarRows = parseFeaturesCsv(featuresText);
  renderScalarTable();

  const plots = $("plots");
  plots.replaceChildren();
  for (const group of groupCurves(Object.keys(curves.curves))) {
    const section = document.createElement("section");
    const h = document.createElement("h3");
    h.textContent = group.family;
    section.appendChild(h);
    const grid = document.createElement("div");
    grid.className = "plot-grid";
    for (const name of group.names) {
      grid.appendChild(svgPlot(name, curves));
    }
    section.appendChild(grid);
    plots.appendChild(section);
  }

  show("results", true);
}

function init(): void {
  const input = $<HTMLInputElement>("file-input");
  input.addEventListener("change", () => {
    const chosen = input.files?.[0];
    if (chosen) void onFileChosen(chosen);
  });
  const drop = $("dropzone");
  drop.addEventListener("dragover", (e) => {
    e.preventDefault();
    drop.classList.add("dragging");
  });
  drop.addEventListener("dragleave", () => drop.classList.remove("dragging"));
  drop.addEventListener("drop", (e) => {
    e.preventDefault();
    drop.classList.remove("dragging");
    const chosen = e.dataTransfer?.files?.[0];
    if (chosen) void onFileChosen(chosen);
  });

  $("submit").addEventListener("click", () => void submit());
  $("reset-view").addEventListener("click", () => scatter?.resetView());

  $("sort-name").addEventListener("click", () => {
    sortAscending = sortKey === "name" ? !sortAscending : true;
    sortKey = "name";
    renderScalarTable();
  });
  $("sort-value").addEventListener("click", () => {
    sortAscending = sortKey === "value" ? !sortAscending : true;
    sortKey = "value";
    renderScalarTable();
  });

  window.addEventListener("beforeunload", () => poller?.cancel());

  renderFamilies();
  renderSubmit();

  // a shared link with a job id resumes the progress/results view even
  // though the original file bytes are not restorable client-side
  if (state.jobId) {
    $("file-meta").textContent = "session restored from link; job " + state.jobId;
    show("workbench", true);
    watchJob(state.jobId);
  }
}

init();

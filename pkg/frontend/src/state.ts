/** Session state and its round trip through URL query parameters, so a
 * configured session (selection, families, job id) is shareable as a
 * link. File contents never enter the URL; only metadata the server
 * can restore from the job id. */

import {
  FAMILIES,
  MAX_SELECTED_TYPES,
  ROLE_CODES,
  type SessionState,
} from "./types.js";

export function emptyState(): SessionState {
  return {
    fileName: null,
    fileSize: 0,
    selectedTypes: [],
    families: [...FAMILIES],
    jobId: null,
  };
}

export interface ToggleResult {
  selected: string[];
  /** True when a fourth selection was refused. */
  blocked: boolean;
}

/** Click semantics: deselect if present, append if room, refuse a 4th. */
export function toggleType(selected: string[], label: string): ToggleResult {
  if (selected.includes(label)) {
    return { selected: selected.filter((l) => l !== label), blocked: false };
  }
  if (selected.length >= MAX_SELECTED_TYPES) {
    return { selected: [...selected], blocked: true };
  }
  return { selected: [...selected, label], blocked: false };
}

/** Role code (T, I, S) for a selected label, by selection order. */
export function roleOf(selected: string[], label: string): string | null {
  const i = selected.indexOf(label);
  return i >= 0 ? ROLE_CODES[i] : null;
}

export function toggleFamily(families: string[], family: string): string[] {
  const next = families.includes(family)
    ? families.filter((f) => f !== family)
    : [...families, family];
  // canonical order keeps the URL stable
  return FAMILIES.filter((f) => next.includes(f));
}

export function canSubmit(state: SessionState): boolean {
  return (
    state.fileName !== null &&
    state.selectedTypes.length >= 1 &&
    state.selectedTypes.length <= MAX_SELECTED_TYPES &&
    state.families.length >= 1
  );
}

export function toQuery(state: SessionState): string {
  const params = new URLSearchParams();
  if (state.selectedTypes.length > 0) {
    params.set("types", state.selectedTypes.join(","));
  }
  if (state.families.length > 0 && state.families.length < FAMILIES.length) {
    params.set("families", state.families.join(","));
  }
  if (state.jobId) {
    params.set("job", state.jobId);
  }
  const s = params.toString();
  return s === "" ? "" : `?${s}`;
}

export function fromQuery(query: string): Partial<SessionState> {
  const params = new URLSearchParams(query);
  const out: Partial<SessionState> = {};
  const types = params.get("types");
  if (types) {
    const parsed = types.split(",").filter((t) => t !== "");
    out.selectedTypes = [...new Set(parsed)].slice(0, MAX_SELECTED_TYPES);
  }
  const families = params.get("families");
  if (families) {
    const wanted = new Set(families.split(","));
    const valid = FAMILIES.filter((f) => wanted.has(f));
    if (valid.length > 0) out.families = valid;
  }
  const job = params.get("job");
  if (job && /^[0-9a-f]{1,64}$/.test(job)) {
    out.jobId = job;
  }
  return out;
}

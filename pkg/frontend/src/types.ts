/** Shared data shapes for the UI. */

export interface TypeSummary {
  label: string;
  count: number;
  color: string;
}

export interface BBox {
  xmin: number;
  xmax: number;
  ymin: number;
  ymax: number;
}

/** Client-side parse of (at most the first 4 MB of) the uploaded CSV. */
export interface ParsedPreview {
  /** Interleaved x0,y0,x1,y1,... for fast canvas drawing. */
  coords: Float64Array;
  /** Per-point index into `types`. */
  typeIndex: Uint16Array;
  types: TypeSummary[];
  rowCount: number;
  skippedRows: number;
  /** True when the file was larger than the preview byte cap. */
  truncated: boolean;
  bbox: BBox;
}

export interface SessionState {
  fileName: string | null;
  fileSize: number;
  /** Selection order assigns the roles T, I, S. */
  selectedTypes: string[];
  families: string[];
  jobId: string | null;
}

export interface JobStatus {
  job_id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
  /** Absolute API paths, one per artifact file. */
  artifacts: string[];
}

export interface CurveSeries {
  estimate: (number | null)[];
  theoretical: (number | null)[];
  correction: string;
}

export interface CurvesPayload {
  r: number[];
  curves: Record<string, CurveSeries>;
}

export const FAMILIES = ["summaries", "areal", "topology"] as const;
export const MAX_SELECTED_TYPES = 3;
export const PREVIEW_BYTE_CAP = 4 * 1024 * 1024;
export const ROLE_CODES = ["T", "I", "S"] as const;

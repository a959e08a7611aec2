/** Thin client for the /api/v1 endpoints. The fetch function is
 * injectable so tests can drive it without a server. */

import type { JobStatus } from "./types.js";

export const API_BASE = "/api/v1";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type Fetch = typeof fetch;

async function detailOf(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    /* non-JSON error body */
  }
  return `request failed with status ${response.status}`;
}

export interface SubmitConfig {
  selected_types: string[];
  feature_families: string[];
}

export async function submitJob(
  file: Blob,
  fileName: string,
  config: SubmitConfig,
  fetchFn: Fetch = fetch,
): Promise<string> {
  const form = new FormData();
  form.append("file", file, fileName);
  form.append("config", JSON.stringify(config));
  const response = await fetchFn(`${API_BASE}/jobs`, {
    method: "POST",
    body: form,
  });
  if (response.status !== 201) {
    // 413 and 422 carry the service's message; surface it verbatim
    throw new ApiError(response.status, await detailOf(response));
  }
  const body = await response.json();
  return body.job_id as string;
}

export async function jobStatus(
  jobId: string,
  fetchFn: Fetch = fetch,
): Promise<JobStatus> {
  const response = await fetchFn(`${API_BASE}/jobs/${jobId}`);
  if (!response.ok) {
    throw new ApiError(response.status, await detailOf(response));
  }
  return (await response.json()) as JobStatus;
}

export function artifactUrl(jobId: string, name: string): string {
  return `${API_BASE}/jobs/${jobId}/artifacts/${name}`;
}

export async function fetchArtifactJson<T>(
  jobId: string,
  name: string,
  fetchFn: Fetch = fetch,
): Promise<T> {
  const response = await fetchFn(artifactUrl(jobId, name));
  if (!response.ok) {
    throw new ApiError(response.status, await detailOf(response));
  }
  return (await response.json()) as T;
}

export async function fetchArtifactText(
  jobId: string,
  name: string,
  fetchFn: Fetch = fetch,
): Promise<string> {
  const response = await fetchFn(artifactUrl(jobId, name));
  if (!response.ok) {
    throw new ApiError(response.status, await detailOf(response));
  }
  return await response.text();
}

/** Poll delay for the k-th consecutive non-terminal answer: 1 s base
 * with multiplicative backoff, capped at 8 s. */
export function pollDelay(attempt: number): number {
  return Math.min(1000 * Math.pow(1.5, Math.max(0, attempt)), 8000);
}

export interface PollHandle {
  done: Promise<JobStatus>;
  cancel: () => void;
}

/** Poll a job until done or failed. Resolves with the terminal status
 * (including "failed"); rejects only on transport or HTTP errors.
 * `cancel` stops polling and leaves `done` forever pending, which is
 * what navigation-away wants. */
export function pollJob(
  jobId: string,
  onUpdate: (status: JobStatus) => void,
  fetchFn: Fetch = fetch,
  schedule: (fn: () => void, ms: number) => void = (fn, ms) =>
    void setTimeout(fn, ms),
): PollHandle {
  let cancelled = false;
  const done = new Promise<JobStatus>((resolve, reject) => {
    let attempt = 0;
    const step = async () => {
      if (cancelled) return;
      let status: JobStatus;
      try {
        status = await jobStatus(jobId, fetchFn);
      } catch (err) {
        reject(err);
        return;
      }
      if (cancelled) return;
      onUpdate(status);
      if (status.state === "done" || status.state === "failed") {
        resolve(status);
        return;
      }
      schedule(step, pollDelay(attempt++));
    };
    void step();
  });
  return { done, cancel: () => (cancelled = true) };
}

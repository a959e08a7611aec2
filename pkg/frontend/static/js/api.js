/** Thin client for the /api/v1 endpoints. The fetch function is
 * injectable so tests can drive it without a server. */
export const API_BASE = "/api/v1";
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function detailOf(response) {
    try {
        const body = await response.json();
        if (body && typeof body.detail === "string")
            return body.detail;
    }
    catch {
        /* non-JSON error body */
    }
    return `request failed with status ${response.status}`;
}
export async function submitJob(file, fileName, config, fetchFn = fetch) {
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
    return body.job_id;
}
export async function jobStatus(jobId, fetchFn = fetch) {
    const response = await fetchFn(`${API_BASE}/jobs/${jobId}`);
    if (!response.ok) {
        throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json());
}
export function artifactUrl(jobId, name) {
    return `${API_BASE}/jobs/${jobId}/artifacts/${name}`;
}
export async function fetchArtifactJson(jobId, name, fetchFn = fetch) {
    const response = await fetchFn(artifactUrl(jobId, name));
    if (!response.ok) {
        throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json());
}
export async function fetchArtifactText(jobId, name, fetchFn = fetch) {
    const response = await fetchFn(artifactUrl(jobId, name));
    if (!response.ok) {
        throw new ApiError(response.status, await detailOf(response));
    }
    return await response.text();
}
/** Poll delay for the k-th consecutive non-terminal answer: 1 s base
 * with multiplicative backoff, capped at 8 s. */
export function pollDelay(attempt) {
    return Math.min(1000 * Math.pow(1.5, Math.max(0, attempt)), 8000);
}
/** Poll a job until done or failed. Resolves with the terminal status
 * (including "failed"); rejects only on transport or HTTP errors.
 * `cancel` stops polling and leaves `done` forever pending, which is
 * what navigation-away wants. */
export function pollJob(jobId, onUpdate, fetchFn = fetch, schedule = (fn, ms) => void setTimeout(fn, ms)) {
    let cancelled = false;
    const done = new Promise((resolve, reject) => {
        let attempt = 0;
        const step = async () => {
            if (cancelled)
                return;
            let status;
            try {
                status = await jobStatus(jobId, fetchFn);
            }
            catch (err) {
                reject(err);
                return;
            }
            if (cancelled)
                return;
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

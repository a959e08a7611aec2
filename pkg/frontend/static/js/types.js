/** Shared data shapes for the UI. */
export const FAMILIES = ["summaries", "areal", "topology"];
export const MAX_SELECTED_TYPES = 3;
export const PREVIEW_BYTE_CAP = 4 * 1024 * 1024;
export const ROLE_CODES = ["T", "I", "S"];

/**
 * Wire protocol: newline-delimited JSON over stdin/stdout.
 *
 * handshake (one line, on startup):
 *   {"ready": true, "model": string}            serving
 *   {"ready": false, "message": string}         refusing (then exit non-zero)
 * request:
 *   {"id": string, "prompt": string, "seed": int, "batch": int}
 * response (exactly one line per request line):
 *   {"id": string, "status": "ok"|"error", "mesh_paths": [string], "message": string}
 *
 * A line that cannot be parsed still gets a response; its id is "unknown".
 */

export const UNKNOWN_ID = "unknown";

export interface GenerateRequest {
  id: string;
  prompt: string;
  seed: number;
  batch: number;
}

export interface GenerateResponse {
  id: string;
  status: "ok" | "error";
  mesh_paths: string[];
  message: string;
}

export type ParsedLine =
  | { kind: "request"; request: GenerateRequest }
  | { kind: "invalid"; id: string; message: string };

function extractId(raw: unknown): string {
  if (typeof raw === "object" && raw !== null && !Array.isArray(raw)) {
    const id = (raw as Record<string, unknown>).id;
    if (typeof id === "string" && id.length > 0) return id;
  }
  return UNKNOWN_ID;
}

/** Validate one request line. Never throws; bad input becomes `invalid`. */
export function parseRequestLine(line: string): ParsedLine {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return { kind: "invalid", id: UNKNOWN_ID, message: "request line is not valid JSON" };
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    return { kind: "invalid", id: UNKNOWN_ID, message: "request must be a JSON object" };
  }
  const obj = raw as Record<string, unknown>;
  const id = extractId(raw);
  if (id === UNKNOWN_ID) {
    return { kind: "invalid", id, message: "request is missing a string id" };
  }
  const { prompt, seed, batch } = obj;
  if (typeof prompt !== "string" || prompt.trim().length === 0) {
    return { kind: "invalid", id, message: "prompt must be a non-empty string" };
  }
  if (typeof seed !== "number" || !Number.isInteger(seed)) {
    return { kind: "invalid", id, message: "seed must be an integer" };
  }
  if (typeof batch !== "number" || !Number.isInteger(batch) || batch < 1) {
    return { kind: "invalid", id, message: "batch must be an integer >= 1" };
  }
  return { kind: "request", request: { id, prompt, seed, batch } };
}

export function okResponse(id: string, meshPaths: string[]): GenerateResponse {
  return { id, status: "ok", mesh_paths: meshPaths, message: "" };
}

export function errorResponse(id: string, message: string): GenerateResponse {
  return { id, status: "error", mesh_paths: [], message };
}

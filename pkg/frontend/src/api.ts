// Thin typed client for the consultation service. Everything the UI knows
// about the server lives here; components never touch fetch directly.

export const API_PREFIX = "/api/v1";

export interface ChatResponse {
  session_id: string;
  reply: string;
  matched_similarity: number | null;
  goal_status: string;
  risk_level: string;
}

export interface ClassifyResponse {
  label: string;
  subtype: string | null;
  class_names: string[];
  confidence: number[];
  model_id: string;
}

export interface SessionView {
  session_id: string;
  history: [string, string][];
  risk_profile: Record<string, unknown>;
  risk_level: string;
  goal_status: string;
}

/** Non-2xx reply; `detail` carries the server's message verbatim. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorFrom(response: Response): Promise<ApiError> {
  let detail = response.statusText || `status ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export async function sendChat(
  text: string,
  sessionId: string | null,
  fetchFn: FetchLike = fetch,
): Promise<ChatResponse> {
  const payload: Record<string, string> = { text };
  if (sessionId !== null) payload.session_id = sessionId;
  const response = await fetchFn(`${API_PREFIX}/chat`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!response.ok) throw await errorFrom(response);
  return (await response.json()) as ChatResponse;
}

export async function classifyFeatures(
  payload: Blob,
  modelId: string,
  fetchFn: FetchLike = fetch,
): Promise<ClassifyResponse> {
  const url = `${API_PREFIX}/classify?model_id=${encodeURIComponent(modelId)}`;
  const response = await fetchFn(url, {
    method: "POST",
    headers: { "content-type": "application/octet-stream" },
    body: payload,
  });
  if (!response.ok) throw await errorFrom(response);
  return (await response.json()) as ClassifyResponse;
}

export async function fetchSession(
  sessionId: string,
  fetchFn: FetchLike = fetch,
): Promise<SessionView> {
  const response = await fetchFn(`${API_PREFIX}/session/${encodeURIComponent(sessionId)}`);
  if (!response.ok) throw await errorFrom(response);
  return (await response.json()) as SessionView;
}

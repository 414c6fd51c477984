/** Typed client for the service JSON API.
 *
 * All numbers shown in the UI (relevance, completeness, curve points,
 * blended scores) come verbatim from these payloads; nothing is computed
 * client-side.
 */

export interface SearchResult {
  title: string;
  snippet: string;
  url: string;
  rank: number;
  relevance?: number;
  completeness?: number;
  blended?: number;
}

export interface SearchResponse {
  query: string;
  results: SearchResult[];
  scores_visible: boolean;
  cumulative_completeness?: number;
  curve?: [number, number][];
  lambda?: number;
}

export interface SessionResponse {
  token: string;
  participant_id: string;
  ttl_seconds: number;
}

export interface ScaleDefinition {
  name: string;
  items: string[];
  presented_values: number[];
}

export interface SurveyResult {
  scale: string;
  overall: number;
  by_dimension: Record<string, number>;
}

export interface SearchOptions {
  lambda?: number;
  maxResults?: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function post<T>(path: string, body: unknown): Promise<T> {
  const resp = await fetch(path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = (await resp.json()).detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export function createSession(
  participantId: string,
  password: string,
): Promise<SessionResponse> {
  return post("/session", { participant_id: participantId, password });
}

export function search(
  token: string,
  query: string,
  options: SearchOptions = {},
): Promise<SearchResponse> {
  const body: Record<string, unknown> = {
    session_token: token,
    query,
    max_results: options.maxResults ?? 10,
  };
  if (options.lambda !== undefined) {
    body["lambda"] = options.lambda;
  }
  return post("/search", body);
}

export function postClick(
  token: string,
  query: string,
  rank: number,
): Promise<Response> {
  return fetch("/click", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ session_token: token, query, rank }),
  });
}

export async function fetchScale(name: string): Promise<ScaleDefinition> {
  const resp = await fetch(`/scale/${name}`);
  if (!resp.ok) {
    throw new ApiError(resp.status, resp.statusText);
  }
  return (await resp.json()) as ScaleDefinition;
}

export function submitSurvey(
  token: string,
  scale: string,
  answers: number[],
): Promise<SurveyResult> {
  return post("/survey", { session_token: token, scale, answers });
}

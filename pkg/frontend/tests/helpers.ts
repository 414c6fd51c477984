import { vi } from "vitest";
import type { SearchResponse, SearchResult } from "../src/api";

export function controlResponse(n = 10): SearchResponse {
  const results: SearchResult[] = [];
  for (let i = 1; i <= n; i += 1) {
    results.push({
      title: `Result ${i}`,
      snippet: `Snippet for result ${i}`,
      url: `https://site${i}.example.com/`,
      rank: i,
    });
  }
  return { query: "floods in pakistan", results, scores_visible: false };
}

export function treatmentResponse(n = 10): SearchResponse {
  const base = controlResponse(n);
  const curve: [number, number][] = [[0, 0]];
  for (let k = 1; k <= n; k += 1) {
    curve.push([k / n, Math.round((100 * Math.sqrt(k / n)) * 10) / 10]);
  }
  return {
    ...base,
    scores_visible: true,
    results: base.results.map((r, i) => ({
      ...r,
      relevance: 0.8 - i * 0.01,
      completeness: 90 - i,
    })),
    cumulative_completeness: 71.4,
    curve,
  };
}

export interface RecordedRequest {
  path: string;
  body: Record<string, unknown>;
}

/** Install a fetch mock backed by canned per-path responders; returns the
 * log of JSON request bodies for assertions. */
export function installFetchMock(
  respond: (path: string, body: Record<string, unknown>) =>
    { status: number; json: unknown },
): RecordedRequest[] {
  const log: RecordedRequest[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const path = String(input);
      const body = init?.body ? JSON.parse(String(init.body)) : {};
      log.push({ path, body });
      const { status, json } = respond(path, body);
      return new Response(JSON.stringify(json), {
        status,
        headers: { "Content-Type": "application/json" },
      });
    }),
  );
  return log;
}

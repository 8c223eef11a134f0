/** Typed client for the cpsearch HTTP API. */

export interface RankedResult {
  entry_id: string;
  name: string;
  score: number;
  rank: number;
}

export interface QueryResponse {
  results: RankedResult[];
  config: string;
  provider: string;
  k: number;
}

export interface SourceFile {
  filename: string;
  content: string;
}

export interface ModelResponse {
  entry_id: string;
  name: string;
  provenance: string;
  source_files: SourceFile[];
  descriptions: Record<string, string>;
}

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = "ApiError";
  }
}

/** What the UI needs from a backend; ApiClient is the HTTP implementation. */
export interface ModelSearchApi {
  query(text: string, k?: number): Promise<QueryResponse>;
  getModel(entryId: string): Promise<ModelResponse>;
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `HTTP ${response.status}`;
}

export class ApiClient implements ModelSearchApi {
  /** Base URL may be swapped at runtime (e.g. to point at another backend). */
  baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(`${this.baseUrl}${path}`, init);
    } catch (error) {
      const reason = error instanceof Error ? error.message : String(error);
      throw new ApiError(`cannot reach the backend: ${reason}`);
    }
    if (!response.ok) {
      throw new ApiError(await detailOf(response), response.status);
    }
    return (await response.json()) as T;
  }

  query(text: string, k = 5): Promise<QueryResponse> {
    return this.request<QueryResponse>("/api/query", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text, k }),
    });
  }

  getModel(entryId: string): Promise<ModelResponse> {
    return this.request<ModelResponse>(`/api/models/${encodeURIComponent(entryId)}`);
  }
}

import { ApiClient, ApiError, DocumentResponse, SearchResponse } from "./types";

// Thin fetch wrapper over the service endpoints. The console never
// re-scores or reorders anything the server returns.
export class HttpApiClient implements ApiClient {
  constructor(private baseUrl: string = "") {}

  async search(query: string, k: number): Promise<SearchResponse> {
    const resp = await fetch(`${this.baseUrl}/api/search`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query, k }),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorDetail(resp));
    }
    return (await resp.json()) as SearchResponse;
  }

  async getDocument(docId: string): Promise<DocumentResponse> {
    const resp = await fetch(
      `${this.baseUrl}/api/documents/${encodeURIComponent(docId)}`
    );
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorDetail(resp));
    }
    return (await resp.json()) as DocumentResponse;
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") {
      return body.error;
    }
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${resp.status}`;
}

// Shapes of the service JSON payloads the console consumes.

export interface SearchResult {
  rank: number;
  doc_id: string;
  doc_title: string;
  doc_score: number;
  scope_id: string;
  scope_text: string;
  scope_score: number;
  question_id: string;
  question: string;
  step1_entry_id: string;
}

export interface SearchResponse {
  results: SearchResult[];
  warnings: string[];
  latency_ms: number;
}

export interface ScopeInfo {
  id: string;
  start_para: number;
  end_para: number;
}

export interface DocumentResponse {
  id: string;
  title: string;
  url?: string;
  paragraphs: string[];
  scopes: ScopeInfo[];
}

export interface ApiClient {
  search(query: string, k: number): Promise<SearchResponse>;
  getDocument(docId: string): Promise<DocumentResponse>;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

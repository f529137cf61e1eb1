import { SearchViewState } from "./state";
import { DocumentResponse, SearchResult } from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// One card per result. Collapsed cards show only the rank and the matched
// question; the scope text stays hidden until the user opens the card.
export function renderResultCard(result: SearchResult, expanded: boolean): string {
  const docHref = `#/doc/${encodeURIComponent(result.doc_id)}?scope=${encodeURIComponent(result.scope_id)}`;
  const body = expanded
    ? `<div class="scope-panel">
        <p class="scope-text">${escapeHtml(result.scope_text)}</p>
        <a class="doc-link" href="${docHref}">${escapeHtml(result.doc_title)}</a>
      </div>`
    : "";
  return `<article class="result-card${expanded ? " expanded" : ""}" data-question-id="${escapeHtml(result.question_id)}">
    <header>
      <span class="rank">${result.rank}</span>
      <span class="question">${escapeHtml(result.question)}</span>
    </header>
    ${body}
  </article>`;
}

export function renderResults(state: SearchViewState): string {
  if (state.error !== null) {
    return `<div class="error-banner">${escapeHtml(state.error)}</div>`;
  }
  if (state.loading) {
    return `<div class="loading">Searching...</div>`;
  }
  if (state.searched && state.results.length === 0) {
    return `<div class="no-matches">No matches</div>`;
  }
  // server order is rank order; never reorder client-side
  return state.results
    .map((r) => renderResultCard(r, state.expanded.has(r.question_id)))
    .join("\n");
}

export interface HighlightRange {
  start_para: number;
  end_para: number;
}

export function renderDocument(
  doc: DocumentResponse,
  highlight?: HighlightRange
): string {
  const paragraphs = doc.paragraphs
    .map((text, i) => {
      const on =
        highlight !== undefined &&
        i >= highlight.start_para &&
        i <= highlight.end_para;
      return `<p class="para${on ? " highlight" : ""}" data-para="${i}">${escapeHtml(text)}</p>`;
    })
    .join("\n");
  return `<section class="document">
    <h1>${escapeHtml(doc.title)}</h1>
    ${paragraphs}
  </section>`;
}

export function renderDocumentNotFound(docId: string): string {
  return `<section class="document not-found">
    <h1>Document not found</h1>
    <p>No document with id ${escapeHtml(docId)}.</p>
  </section>`;
}

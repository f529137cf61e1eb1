import { HttpApiClient } from "./api";
import { canSubmit, SearchController, MAX_K } from "./state";
import {
  renderDocument,
  renderDocumentNotFound,
  renderResults,
} from "./render";
import { ApiError } from "./types";

// Browser entry point: wires the pure render/state layer to the DOM.
// The API base URL can be overridden via <body data-api-base="...">.

function start(): void {
  const apiBase = document.body.dataset.apiBase ?? "";
  const api = new HttpApiClient(apiBase);
  const form = document.getElementById("search-form") as HTMLFormElement;
  const input = document.getElementById("query") as HTMLInputElement;
  const kSelect = document.getElementById("k") as HTMLSelectElement;
  const submit = document.getElementById("submit") as HTMLButtonElement;
  const resultsEl = document.getElementById("results") as HTMLElement;
  const docEl = document.getElementById("document") as HTMLElement;

  for (let k = 1; k <= MAX_K; k++) {
    const opt = document.createElement("option");
    opt.value = String(k);
    opt.textContent = String(k);
    kSelect.appendChild(opt);
  }
  kSelect.value = "3";

  const controller = new SearchController(api, (state) => {
    submit.disabled = !canSubmit(state);
    resultsEl.innerHTML = renderResults(state);
  });

  input.addEventListener("input", () => controller.setQuery(input.value));
  kSelect.addEventListener("change", () =>
    controller.setK(parseInt(kSelect.value, 10))
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void controller.submit();
  });
  resultsEl.addEventListener("click", (event) => {
    const card = (event.target as HTMLElement).closest(".result-card");
    if (card instanceof HTMLElement && card.dataset.questionId) {
      if ((event.target as HTMLElement).closest("a") !== null) {
        return; // follow the document link instead of toggling
      }
      controller.toggle(card.dataset.questionId);
    }
  });

  async function showDocument(): Promise<void> {
    const match = window.location.hash.match(
      /^#\/doc\/([^?]+)(?:\?scope=(.+))?$/
    );
    if (!match) {
      docEl.innerHTML = "";
      return;
    }
    const docId = decodeURIComponent(match[1]);
    const scopeId = match[2] ? decodeURIComponent(match[2]) : undefined;
    try {
      const doc = await api.getDocument(docId);
      const scope = doc.scopes.find((s) => s.id === scopeId);
      docEl.innerHTML = renderDocument(doc, scope);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        docEl.innerHTML = renderDocumentNotFound(docId);
      } else {
        throw err;
      }
    }
  }

  window.addEventListener("hashchange", () => void showDocument());
  void showDocument();
  submit.disabled = true;
}

document.addEventListener("DOMContentLoaded", start);

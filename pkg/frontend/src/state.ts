import { ApiClient, ApiError, SearchResult } from "./types";

export const MAX_K = 10;

export interface SearchViewState {
  query: string;
  k: number;
  results: SearchResult[];
  // question_id of each result whose scope panel is open
  expanded: ReadonlySet<string>;
  loading: boolean;
  error: string | null;
  searched: boolean;
}

export function initialState(): SearchViewState {
  return {
    query: "",
    k: 3,
    results: [],
    expanded: new Set(),
    loading: false,
    error: null,
    searched: false,
  };
}

// A new submit while one is loading is allowed: it supersedes the old
// search, whose response is then discarded by sequence number.
export function canSubmit(state: SearchViewState): boolean {
  return state.query.trim().length > 0;
}

export function setQuery(state: SearchViewState, query: string): SearchViewState {
  return { ...state, query };
}

export function setK(state: SearchViewState, k: number): SearchViewState {
  if (!Number.isInteger(k) || k < 1 || k > MAX_K) {
    return state;
  }
  return { ...state, k };
}

// Toggling only applies to displayed results, so expanded stays a subset
// of the ids on screen.
export function toggleExpanded(
  state: SearchViewState,
  questionId: string
): SearchViewState {
  if (!state.results.some((r) => r.question_id === questionId)) {
    return state;
  }
  const expanded = new Set(state.expanded);
  if (expanded.has(questionId)) {
    expanded.delete(questionId);
  } else {
    expanded.add(questionId);
  }
  return { ...state, expanded };
}

// Drives the search lifecycle. Only the most recent submission may touch
// the state: each submit bumps a sequence number and responses carrying a
// stale number are dropped, so out-of-order arrivals cannot overwrite a
// newer search.
export class SearchController {
  state: SearchViewState = initialState();
  private seq = 0;

  constructor(
    private api: ApiClient,
    private onChange: (state: SearchViewState) => void = () => {}
  ) {}

  private update(state: SearchViewState): void {
    this.state = state;
    this.onChange(state);
  }

  setQuery(query: string): void {
    this.update(setQuery(this.state, query));
  }

  setK(k: number): void {
    this.update(setK(this.state, k));
  }

  toggle(questionId: string): void {
    this.update(toggleExpanded(this.state, questionId));
  }

  async submit(): Promise<void> {
    if (!canSubmit(this.state)) {
      return;
    }
    const mySeq = ++this.seq;
    this.update({ ...this.state, loading: true, error: null });
    try {
      const resp = await this.api.search(this.state.query, this.state.k);
      if (mySeq !== this.seq) {
        return; // a newer search superseded this one
      }
      this.update({
        ...this.state,
        results: resp.results,
        expanded: new Set(),
        loading: false,
        searched: true,
      });
    } catch (err) {
      if (mySeq !== this.seq) {
        return;
      }
      const message =
        err instanceof ApiError
          ? err.message
          : "could not reach the search service";
      this.update({
        ...this.state,
        results: [],
        expanded: new Set(),
        loading: false,
        error: message,
        searched: true,
      });
    }
  }
}

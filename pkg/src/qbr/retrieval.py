"""Two-step search: document selection over the pair index, then scope
disambiguation inside each selected document under the adjusted embedding.

Step 1 uses the base provider; Step 2 re-ranks the selected document's
scopes with the adapter applied to both query and scope embeddings, and
attaches the bank question that best paraphrases the query.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adapter import Adapter
from .corpus import Corpus, questions_for_scope, scope_set, scope_text
from .embedding import EmbeddingProvider, cosine
from .errors import EmptyScopeSet, NoQuestionForScope, UnknownDocument
from .vindex import PairIndex, top_k


@dataclass(frozen=True)
class QSResult:
    rank: int
    doc_id: str
    doc_title: str
    doc_score: float
    scope_id: str
    scope_text: str
    scope_score: float
    question_id: str
    question: str
    step1_entry_id: str  # best pair-index entry that selected the document

    def to_dict(self) -> dict:
        return {"rank": self.rank, "doc_id": self.doc_id, "doc_title": self.doc_title,
                "doc_score": self.doc_score, "scope_id": self.scope_id,
                "scope_text": self.scope_text, "scope_score": self.scope_score,
                "question_id": self.question_id, "question": self.question,
                "step1_entry_id": self.step1_entry_id}


def select_documents(corpus: Corpus, index: PairIndex, provider: EmbeddingProvider,
                     query: str, k: int) -> list[tuple[str, str, float]]:
    """First k distinct documents along the descending pair-hit list.

    Returns (doc_id, best_entry_id, doc_score) triples in hit order.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(index) == 0:
        return []
    query_vec = provider.embed(query)
    hits = top_k(index, query_vec, len(index))
    out: list[tuple[str, str, float]] = []
    seen: set[str] = set()
    for hit in hits:
        doc_id = corpus.qb[hit.entry_id].doc_id
        if doc_id in seen:
            continue
        seen.add(doc_id)
        out.append((doc_id, hit.entry_id, hit.score))
        if len(out) == k:
            break
    return out


def rank_scopes(corpus: Corpus, provider: EmbeddingProvider, adapter: Adapter,
                query: str, doc_id: str) -> list[tuple[str, float]]:
    """All scopes of the document scored under the adjusted embedding."""
    if doc_id not in corpus.documents:
        raise UnknownDocument(doc_id)
    scope_ids = scope_set(corpus, doc_id)
    if not scope_ids:
        raise EmptyScopeSet(doc_id)
    query_adj = adapter.transform(provider.embed(query))
    scored = []
    for scope_id in scope_ids:
        scope_adj = adapter.transform(provider.embed(scope_text(corpus, scope_id)))
        scored.append((scope_id, cosine(query_adj, scope_adj)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


def display_question(corpus: Corpus, provider: EmbeddingProvider,
                     query: str, scope_id: str) -> str:
    """QB entry whose question best matches the query among the scope's
    questions; augmented entries are only used when nothing else exists."""
    entry_ids = questions_for_scope(corpus, scope_id)
    if not entry_ids:
        raise NoQuestionForScope(scope_id)
    natural = [e for e in entry_ids if corpus.qb[e].source != "augmented"]
    candidates = natural or entry_ids
    query_vec = provider.embed(query)
    best_id, best_score = None, None
    for entry_id in candidates:  # ascending id, so ties keep the first seen
        score = cosine(query_vec, provider.embed(corpus.qb[entry_id].question))
        if best_score is None or score > best_score:
            best_id, best_score = entry_id, score
    return best_id


def search(corpus: Corpus, index: PairIndex, provider: EmbeddingProvider,
           adapter: Adapter, query: str, k: int,
           warnings: list[str] | None = None) -> list[QSResult]:
    """Full pipeline: one disambiguated question-scope pair per selected doc.

    Documents whose scope ranking fails are skipped; the reason is appended
    to ``warnings`` when a list is supplied.
    """
    results: list[QSResult] = []
    for doc_id, entry_id, doc_score in select_documents(corpus, index, provider, query, k):
        try:
            ranked = rank_scopes(corpus, provider, adapter, query, doc_id)
            best_scope, best_score = ranked[0]
            question_id = display_question(corpus, provider, query, best_scope)
        except (EmptyScopeSet, NoQuestionForScope) as exc:
            if warnings is not None:
                warnings.append(f"skipped document {doc_id}: {type(exc).__name__}: {exc}")
            continue
        doc = corpus.documents[doc_id]
        results.append(QSResult(
            rank=len(results) + 1, doc_id=doc_id, doc_title=doc.title,
            doc_score=doc_score, scope_id=best_scope,
            scope_text=scope_text(corpus, best_scope), scope_score=best_score,
            question_id=question_id, question=corpus.qb[question_id].question,
            step1_entry_id=entry_id))
    return results

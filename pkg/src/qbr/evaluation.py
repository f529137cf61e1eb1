"""Retrieval quality metrics, baselines, and report tables.

Document metrics (recall@k, reciprocal rank) come from the two-step
engine's document ranking; scope metrics (accuracy, reciprocal rank) are
computed inside the gold document so the two stages are measured
independently. A lexical Okapi BM25 ranker and a direct base-embedding
document ranker serve as comparison systems.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field

from .adapter import Adapter, identity_adapter
from .corpus import Corpus, doc_text, scope_set, scope_text
from .embedding import EmbeddingProvider, cosine, tokenize
from .errors import EmptyTestSet, IntegrityError, ParseError
from .retrieval import rank_scopes, select_documents
from .vindex import PairIndex


@dataclass(frozen=True)
class TestCase:
    user_input: str
    gold_doc_id: str
    gold_scope_id: str


@dataclass
class EvalReport:
    n_cases: int
    recall_at: dict[int, float]
    mrr_d: float
    mrr_s: float
    acc: float
    mean_latency_ms: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"n_cases": self.n_cases,
                "recall_at": {str(k): v for k, v in sorted(self.recall_at.items())},
                "mrr_d": self.mrr_d, "mrr_s": self.mrr_s, "acc": self.acc,
                "mean_latency_ms": self.mean_latency_ms, "warnings": self.warnings}


def recall_at_k(ranked_doc_ids: list[str], gold_doc_id: str, k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return 1.0 if gold_doc_id in ranked_doc_ids[:k] else 0.0


def reciprocal_rank(ranked_ids: list[str], gold_id: str, cutoff: int) -> float:
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    for i, rid in enumerate(ranked_ids[:cutoff], start=1):
        if rid == gold_id:
            return 1.0 / i
    return 0.0


def scope_accuracy(ranked_scope_ids: list[str], gold_scope_id: str,
                   warnings: list[str] | None = None) -> float:
    if not ranked_scope_ids:
        raise ValueError("ranking must be non-empty")
    if gold_scope_id not in ranked_scope_ids and warnings is not None:
        warnings.append(f"gold scope {gold_scope_id!r} absent from ranking")
    return 1.0 if ranked_scope_ids[0] == gold_scope_id else 0.0


def load_testset(path) -> list[TestCase]:
    cases: list[TestCase] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                cases.append(TestCase(user_input=rec["user_input"],
                                      gold_doc_id=rec["gold_doc_id"],
                                      gold_scope_id=rec["gold_scope_id"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad test case: {exc}") from exc
    return cases


def save_testset(cases: list[TestCase], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in cases:
            fh.write(json.dumps({"user_input": c.user_input,
                                 "gold_doc_id": c.gold_doc_id,
                                 "gold_scope_id": c.gold_scope_id},
                                ensure_ascii=False) + "\n")


def _validate_testset(corpus: Corpus, testset: list[TestCase]) -> None:
    if not testset:
        raise EmptyTestSet("test set is empty")
    for case in testset:
        scope = corpus.scopes.get(case.gold_scope_id)
        if scope is None or scope.doc_id != case.gold_doc_id:
            raise IntegrityError(
                f"test case gold scope {case.gold_scope_id!r} does not belong to "
                f"document {case.gold_doc_id!r}")


def _evaluate_rankers(corpus: Corpus, testset: list[TestCase], doc_ranker,
                      scope_ranker, ks: list[int], cutoff: int) -> EvalReport:
    recall_sums = {k: 0.0 for k in ks}
    rr_d_sum = rr_s_sum = acc_sum = 0.0
    latency_sum = 0.0
    warnings: list[str] = []
    for case in testset:
        t0 = time.perf_counter()
        ranked_docs = doc_ranker(case.user_input)
        latency_sum += (time.perf_counter() - t0) * 1000.0
        for k in ks:
            recall_sums[k] += recall_at_k(ranked_docs, case.gold_doc_id, k)
        rr_d_sum += reciprocal_rank(ranked_docs, case.gold_doc_id, cutoff)
        ranked_scopes = scope_ranker(case.user_input, case.gold_doc_id)
        acc_sum += scope_accuracy(ranked_scopes, case.gold_scope_id, warnings)
        rr_s_sum += reciprocal_rank(ranked_scopes, case.gold_scope_id, len(ranked_scopes))
    n = len(testset)
    return EvalReport(n_cases=n,
                      recall_at={k: recall_sums[k] / n for k in ks},
                      mrr_d=rr_d_sum / n, mrr_s=rr_s_sum / n, acc=acc_sum / n,
                      mean_latency_ms=latency_sum / n, warnings=warnings)


def evaluate(corpus: Corpus, index: PairIndex, provider: EmbeddingProvider,
             adapter: Adapter, testset: list[TestCase],
             ks: list[int] = (1, 3, 5), cutoff: int = 5) -> EvalReport:
    """Score the two-step engine over a labeled test set."""
    ks = sorted(set(ks))
    _validate_testset(corpus, testset)
    depth = max(max(ks), cutoff)

    def doc_ranker(query: str) -> list[str]:
        return [doc_id for doc_id, _, _ in
                select_documents(corpus, index, provider, query, depth)]

    def scope_ranker(query: str, gold_doc: str) -> list[str]:
        return [sid for sid, _ in rank_scopes(corpus, provider, adapter, query, gold_doc)]

    return _evaluate_rankers(corpus, testset, doc_ranker, scope_ranker, ks, cutoff)


class BM25:
    """Okapi BM25 over token bags, idf = ln((N - df + 0.5)/(df + 0.5) + 1)."""

    def __init__(self, texts_by_id: dict[str, str], k1: float = 1.2, b: float = 0.75):
        self.k1 = k1
        self.b = b
        self.ids = sorted(texts_by_id)
        self.tf = {i: Counter(tokenize(texts_by_id[i])) for i in self.ids}
        self.lengths = {i: sum(self.tf[i].values()) for i in self.ids}
        n = len(self.ids)
        self.avgdl = (sum(self.lengths.values()) / n) if n else 0.0
        df = Counter()
        for counts in self.tf.values():
            df.update(counts.keys())
        self.idf = {t: math.log((n - d + 0.5) / (d + 0.5) + 1.0) for t, d in df.items()}

    def score(self, query: str, text_id: str) -> float:
        tf = self.tf[text_id]
        dl = self.lengths[text_id]
        denom_norm = self.k1 * (1.0 - self.b + self.b * dl / self.avgdl) if self.avgdl else 0.0
        s = 0.0
        for term in tokenize(query):
            f = tf.get(term, 0)
            if f == 0:
                continue
            s += self.idf.get(term, 0.0) * f * (self.k1 + 1.0) / (f + denom_norm)
        return s

    def rank(self, query: str) -> list[str]:
        scored = [(tid, self.score(query, tid)) for tid in self.ids]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return [tid for tid, _ in scored]


def bm25_rank(corpus: Corpus, query: str, k1: float = 1.2, b: float = 0.75) -> list[str]:
    """Rank all documents lexically; ties broken by ascending document id."""
    ranker = BM25({d: doc_text(corpus, d) for d in corpus.doc_ids()}, k1=k1, b=b)
    return ranker.rank(query)


def base_embedding_rank(corpus: Corpus, provider: EmbeddingProvider, query: str) -> list[str]:
    """Direct document retrieval: cosine of query vs whole-document embedding."""
    qv = provider.embed(query)
    scored = [(d, cosine(qv, provider.embed(doc_text(corpus, d)))) for d in corpus.doc_ids()]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [d for d, _ in scored]


def compare(corpus: Corpus, index: PairIndex, provider: EmbeddingProvider,
            adapter: Adapter, testset: list[TestCase],
            ks: list[int] = (1, 3, 5), cutoff: int = 5) -> dict[str, EvalReport]:
    """Three-system comparison: lexical BM25, direct base-embedding
    retrieval, and the two-step question-bank engine."""
    ks = sorted(set(ks))
    _validate_testset(corpus, testset)

    doc_bm25 = BM25({d: doc_text(corpus, d) for d in corpus.doc_ids()})

    def bm25_scope_ranker(query: str, gold_doc: str) -> list[str]:
        ranker = BM25({s: scope_text(corpus, s) for s in scope_set(corpus, gold_doc)})
        return ranker.rank(query)

    ident = identity_adapter(provider.dim, provider.fingerprint)

    def base_scope_ranker(query: str, gold_doc: str) -> list[str]:
        return [sid for sid, _ in rank_scopes(corpus, provider, ident, query, gold_doc)]

    reports = {
        "bm25": _evaluate_rankers(corpus, testset, doc_bm25.rank,
                                  bm25_scope_ranker, ks, cutoff),
        "base": _evaluate_rankers(
            corpus, testset,
            lambda q: base_embedding_rank(corpus, provider, q),
            base_scope_ranker, ks, cutoff),
        "qbr": evaluate(corpus, index, provider, adapter, testset, ks, cutoff),
    }
    return reports


def format_comparison(reports: dict[str, EvalReport]) -> str:
    """Aligned plain-text table: one row per system, one column per metric."""
    some = next(iter(reports.values()))
    ks = sorted(some.recall_at)
    headers = ["system"] + [f"recall@{k}" for k in ks] + ["MRR_d", "acc", "MRR_s", "ms/query"]
    rows = []
    for name in sorted(reports):
        r = reports[name]
        rows.append([name] + [f"{r.recall_at[k]:.4f}" for k in ks]
                    + [f"{r.mrr_d:.4f}", f"{r.acc:.4f}", f"{r.mrr_s:.4f}",
                       f"{r.mean_latency_ms:.2f}"])
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)

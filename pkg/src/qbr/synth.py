"""Deterministic synthetic corpus generator.

Each document gets a shared topic vocabulary plus a small distinctive
vocabulary per scope; paragraphs mix the two at a configurable overlap
fraction, so scopes of one document are mutually similar (hard to
disambiguate) while documents stay well separated. Questions reference
their scope's distinctive tokens diluted with shared tokens and one
distinctive token of a sibling scope, which makes scope identification
under the raw embedding deliberately ambiguous.
"""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, Document, QBEntry, Scope
from .evaluation import TestCase

PARA_LEN = 30
SHARED_VOCAB = 12
DISTINCT_VOCAB = 6
QUESTION_SHARED = 5
QUESTION_DISTINCT = 2


def gen_synthetic(n_docs: int, scopes_per_doc: int, questions_per_scope: int,
                  overlap: float, seed: int) -> tuple[Corpus, list[TestCase]]:
    """Build a planted corpus and its question-derived test set."""
    if n_docs < 1 or scopes_per_doc < 1 or questions_per_scope < 1:
        raise ValueError("n_docs, scopes_per_doc and questions_per_scope must be >= 1")
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    rng = np.random.default_rng(seed)

    documents: dict[str, Document] = {}
    scopes: dict[str, Scope] = {}
    qb: dict[str, QBEntry] = {}
    testset: list[TestCase] = []

    n_shared_words = round(overlap * PARA_LEN)
    for i in range(n_docs):
        doc_id = f"d{i:03d}"
        shared = [f"{doc_id}w{j:02d}" for j in range(SHARED_VOCAB)]
        distinct = [[f"{doc_id}s{m}x{j}" for j in range(DISTINCT_VOCAB)]
                    for m in range(scopes_per_doc)]
        paragraphs = []
        for m in range(scopes_per_doc):
            words = list(rng.choice(shared, size=n_shared_words))
            words += list(rng.choice(distinct[m], size=PARA_LEN - n_shared_words))
            rng.shuffle(words)
            paragraphs.append(" ".join(words))
        documents[doc_id] = Document(id=doc_id, title=f"Synthetic document {i}",
                                     paragraphs=tuple(paragraphs))
        for m in range(scopes_per_doc):
            scope_id = f"{doc_id}-s{m}"
            scopes[scope_id] = Scope(id=scope_id, doc_id=doc_id,
                                     start_para=m, end_para=m)
            for q in range(questions_per_scope):
                entry_id = f"{scope_id}-q{q}"
                words = list(rng.choice(distinct[m], size=QUESTION_DISTINCT, replace=False))
                if scopes_per_doc > 1:
                    # one token from a sibling scope blurs the lexical signal
                    sibling = int(rng.integers(scopes_per_doc - 1))
                    sibling = sibling if sibling < m else sibling + 1
                    words.append(str(rng.choice(distinct[sibling])))
                words += list(rng.choice(shared, size=QUESTION_SHARED))
                rng.shuffle(words)
                question = " ".join(words)
                qb[entry_id] = QBEntry(id=entry_id, question=question, doc_id=doc_id,
                                       scope_id=scope_id, source="human")
                testset.append(TestCase(user_input=question, gold_doc_id=doc_id,
                                        gold_scope_id=scope_id))
    return Corpus(documents=documents, scopes=scopes, qb=qb), testset

import json

import pytest

from qbr.corpus import load_corpus
from qbr.embedding import HashEmbedder


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


TINY_DOCS = [
    {"id": "d1", "title": "Defamation", "paragraphs": ["A", "B", "C"]},
    {"id": "d2", "title": "Contracts", "url": "http://example/d2",
     "paragraphs": ["Offer and acceptance", "Consideration"]},
]
TINY_SCOPES = [
    {"id": "s1", "doc_id": "d1", "start_para": 0, "end_para": 0},
    {"id": "s2", "doc_id": "d1", "start_para": 1, "end_para": 2},
    {"id": "s3", "doc_id": "d2", "start_para": 0, "end_para": 1},
]
TINY_QB = [
    {"id": "e1", "question": "What is libel?", "doc_id": "d1", "scope_id": "s1",
     "source": "human"},
    {"id": "e2", "question": "What is slander?", "doc_id": "d1", "scope_id": "s2",
     "source": "machine"},
    {"id": "e3", "question": "Is a verbal deal binding?", "doc_id": "d2",
     "scope_id": "s3", "source": "human"},
    {"id": "e4", "question": "What makes a contract valid?", "doc_id": "d2",
     "scope_id": "s3", "source": "human"},
]


@pytest.fixture
def corpus_paths(tmp_path):
    docs = tmp_path / "documents.jsonl"
    scopes = tmp_path / "scopes.jsonl"
    qb = tmp_path / "qb.jsonl"
    write_jsonl(docs, TINY_DOCS)
    write_jsonl(scopes, TINY_SCOPES)
    write_jsonl(qb, TINY_QB)
    return docs, scopes, qb


@pytest.fixture
def tiny_corpus(corpus_paths):
    return load_corpus(*corpus_paths)


@pytest.fixture
def provider():
    return HashEmbedder(64)

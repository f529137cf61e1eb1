"""Document collection and question bank: loading, validation, derived sets.

The corpus is three JSONL files (documents, scopes, question-bank entries)
cross-validated into one immutable structure. A scope is a contiguous
paragraph range inside one document; a QB entry ties a question to a scope.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable

from .errors import IntegrityError, ParseError, UnknownDocument, UnknownScope

QB_SOURCES = ("human", "machine", "augmented")


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    paragraphs: tuple[str, ...]
    url: str | None = None


@dataclass(frozen=True)
class Scope:
    id: str
    doc_id: str
    start_para: int
    end_para: int


@dataclass(frozen=True)
class QBEntry:
    id: str
    question: str
    doc_id: str
    scope_id: str
    source: str  # one of QB_SOURCES


@dataclass(frozen=True)
class Corpus:
    documents: dict[str, Document] = field(default_factory=dict)
    scopes: dict[str, Scope] = field(default_factory=dict)
    qb: dict[str, QBEntry] = field(default_factory=dict)

    def doc_ids(self) -> list[str]:
        return sorted(self.documents)

    def scope_ids(self) -> list[str]:
        return sorted(self.scopes)

    def entry_ids(self) -> list[str]:
        return sorted(self.qb)


def _read_jsonl(path, required: set[str], optional: set[str]) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(rec, dict):
                raise ParseError(f"{path}:{lineno}: record is not an object")
            missing = required - rec.keys()
            if missing:
                raise ParseError(f"{path}:{lineno}: missing fields {sorted(missing)}")
            unknown = rec.keys() - required - optional
            if unknown:
                raise ParseError(f"{path}:{lineno}: unknown fields {sorted(unknown)}")
            yield lineno, rec


def _parse_document(path, lineno: int, rec: dict) -> Document:
    if not isinstance(rec["id"], str) or not rec["id"]:
        raise ParseError(f"{path}:{lineno}: document id must be a non-empty string")
    paras = rec["paragraphs"]
    if not isinstance(paras, list) or not paras or not all(isinstance(p, str) and p for p in paras):
        raise ParseError(f"{path}:{lineno}: paragraphs must be a non-empty list of non-empty strings")
    url = rec.get("url")
    if url is not None and not isinstance(url, str):
        raise ParseError(f"{path}:{lineno}: url must be a string")
    if not isinstance(rec["title"], str):
        raise ParseError(f"{path}:{lineno}: title must be a string")
    return Document(id=rec["id"], title=rec["title"], paragraphs=tuple(paras), url=url)


def _parse_scope(path, lineno: int, rec: dict) -> Scope:
    for key in ("id", "doc_id"):
        if not isinstance(rec[key], str) or not rec[key]:
            raise ParseError(f"{path}:{lineno}: {key} must be a non-empty string")
    for key in ("start_para", "end_para"):
        if not isinstance(rec[key], int) or isinstance(rec[key], bool):
            raise ParseError(f"{path}:{lineno}: {key} must be an integer")
    return Scope(id=rec["id"], doc_id=rec["doc_id"],
                 start_para=rec["start_para"], end_para=rec["end_para"])


def _parse_entry(path, lineno: int, rec: dict) -> QBEntry:
    for key in ("id", "question", "doc_id", "scope_id"):
        if not isinstance(rec[key], str) or not rec[key]:
            raise ParseError(f"{path}:{lineno}: {key} must be a non-empty string")
    if rec["source"] not in QB_SOURCES:
        raise ParseError(f"{path}:{lineno}: source must be one of {QB_SOURCES}")
    return QBEntry(id=rec["id"], question=rec["question"], doc_id=rec["doc_id"],
                   scope_id=rec["scope_id"], source=rec["source"])


def load_corpus(doc_path, scope_path, qb_path) -> Corpus:
    """Load and cross-validate the three corpus files.

    Raises ParseError for malformed lines and IntegrityError for dangling
    references, out-of-range paragraph indices, or duplicate ids. Orphan
    scopes (no QB entry) only warn.
    """
    documents: dict[str, Document] = {}
    for lineno, rec in _read_jsonl(doc_path, {"id", "title", "paragraphs"}, {"url"}):
        doc = _parse_document(doc_path, lineno, rec)
        if doc.id in documents:
            raise IntegrityError(f"duplicate document id {doc.id!r}")
        documents[doc.id] = doc

    scopes: dict[str, Scope] = {}
    for lineno, rec in _read_jsonl(scope_path, {"id", "doc_id", "start_para", "end_para"}, set()):
        scope = _parse_scope(scope_path, lineno, rec)
        if scope.id in scopes:
            raise IntegrityError(f"duplicate scope id {scope.id!r}")
        doc = documents.get(scope.doc_id)
        if doc is None:
            raise IntegrityError(f"scope {scope.id!r} references unknown document {scope.doc_id!r}")
        if not (0 <= scope.start_para <= scope.end_para < len(doc.paragraphs)):
            raise IntegrityError(
                f"scope {scope.id!r} paragraph range [{scope.start_para}, {scope.end_para}] "
                f"out of range for document {doc.id!r} with {len(doc.paragraphs)} paragraphs")
        scopes[scope.id] = scope

    qb: dict[str, QBEntry] = {}
    referenced: set[str] = set()
    for lineno, rec in _read_jsonl(qb_path, {"id", "question", "doc_id", "scope_id", "source"}, set()):
        entry = _parse_entry(qb_path, lineno, rec)
        if entry.id in qb:
            raise IntegrityError(f"duplicate QB entry id {entry.id!r}")
        if entry.doc_id not in documents:
            raise IntegrityError(f"entry {entry.id!r} references unknown document {entry.doc_id!r}")
        scope = scopes.get(entry.scope_id)
        if scope is None:
            raise IntegrityError(f"entry {entry.id!r} references unknown scope {entry.scope_id!r}")
        if scope.doc_id != entry.doc_id:
            raise IntegrityError(
                f"entry {entry.id!r}: scope {entry.scope_id!r} belongs to document "
                f"{scope.doc_id!r}, not {entry.doc_id!r}")
        qb[entry.id] = entry
        referenced.add(entry.scope_id)

    orphans = sorted(set(scopes) - referenced)
    if orphans:
        warnings.warn(f"{len(orphans)} scope(s) have no QB entry: {orphans[:5]}", stacklevel=2)

    return Corpus(documents=documents, scopes=scopes, qb=qb)


def save_corpus(corpus: Corpus, doc_path, scope_path, qb_path) -> None:
    """Write the corpus back as three JSONL files in ascending id order."""
    with open(doc_path, "w", encoding="utf-8") as fh:
        for doc_id in corpus.doc_ids():
            d = corpus.documents[doc_id]
            rec = {"id": d.id, "title": d.title, "paragraphs": list(d.paragraphs)}
            if d.url is not None:
                rec["url"] = d.url
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    with open(scope_path, "w", encoding="utf-8") as fh:
        for scope_id in corpus.scope_ids():
            s = corpus.scopes[scope_id]
            fh.write(json.dumps({"id": s.id, "doc_id": s.doc_id, "start_para": s.start_para,
                                 "end_para": s.end_para}, ensure_ascii=False) + "\n")
    with open(qb_path, "w", encoding="utf-8") as fh:
        for entry_id in corpus.entry_ids():
            e = corpus.qb[entry_id]
            fh.write(json.dumps({"id": e.id, "question": e.question, "doc_id": e.doc_id,
                                 "scope_id": e.scope_id, "source": e.source},
                                ensure_ascii=False) + "\n")


def scope_text(corpus: Corpus, scope_id: str) -> str:
    """Paragraphs of the scope joined with single newlines, in document order."""
    scope = corpus.scopes.get(scope_id)
    if scope is None:
        raise UnknownScope(scope_id)
    doc = corpus.documents[scope.doc_id]
    return "\n".join(doc.paragraphs[scope.start_para:scope.end_para + 1])


def doc_text(corpus: Corpus, doc_id: str) -> str:
    """Whole document body: all paragraphs joined with newlines."""
    doc = corpus.documents.get(doc_id)
    if doc is None:
        raise UnknownDocument(doc_id)
    return "\n".join(doc.paragraphs)


def question_set(corpus: Corpus, doc_id: str) -> list[str]:
    """Ids of QB entries whose question is answered inside the document."""
    if doc_id not in corpus.documents:
        raise UnknownDocument(doc_id)
    return sorted(e.id for e in corpus.qb.values() if e.doc_id == doc_id)


def scope_set(corpus: Corpus, doc_id: str) -> list[str]:
    """Ids of all scopes of the document, referenced by questions or not."""
    if doc_id not in corpus.documents:
        raise UnknownDocument(doc_id)
    return sorted(s.id for s in corpus.scopes.values() if s.doc_id == doc_id)


def questions_for_scope(corpus: Corpus, scope_id: str) -> list[str]:
    """Ids of QB entries answered by this scope."""
    if scope_id not in corpus.scopes:
        raise UnknownScope(scope_id)
    return sorted(e.id for e in corpus.qb.values() if e.scope_id == scope_id)

import pytest

from qbr.corpus import (load_corpus, question_set, questions_for_scope,
                        save_corpus, scope_set, scope_text)
from qbr.errors import IntegrityError, ParseError, UnknownDocument, UnknownScope

from conftest import TINY_DOCS, TINY_QB, TINY_SCOPES, write_jsonl


def test_load_counts(tiny_corpus):
    assert len(tiny_corpus.documents) == 2
    assert len(tiny_corpus.scopes) == 3
    assert len(tiny_corpus.qb) == 4


def test_dangling_scope_reference(tmp_path):
    docs = tmp_path / "d.jsonl"
    scopes = tmp_path / "s.jsonl"
    qb = tmp_path / "q.jsonl"
    write_jsonl(docs, TINY_DOCS)
    write_jsonl(scopes, TINY_SCOPES)
    bad = TINY_QB[:1] + [{**TINY_QB[1], "scope_id": "s99"}]
    write_jsonl(qb, bad)
    with pytest.raises(IntegrityError, match="s99"):
        load_corpus(docs, scopes, qb)


def test_scope_index_out_of_range(tmp_path):
    docs = tmp_path / "d.jsonl"
    scopes = tmp_path / "s.jsonl"
    qb = tmp_path / "q.jsonl"
    write_jsonl(docs, TINY_DOCS)
    # end_para == paragraph count of d1 (3) is one past the last index
    write_jsonl(scopes, [{"id": "s1", "doc_id": "d1", "start_para": 0, "end_para": 3}])
    write_jsonl(qb, [])
    with pytest.raises(IntegrityError, match="out of range"):
        load_corpus(docs, scopes, qb)


def test_scope_doc_mismatch(tmp_path):
    docs = tmp_path / "d.jsonl"
    scopes = tmp_path / "s.jsonl"
    qb = tmp_path / "q.jsonl"
    write_jsonl(docs, TINY_DOCS)
    write_jsonl(scopes, TINY_SCOPES)
    write_jsonl(qb, [{**TINY_QB[0], "doc_id": "d2"}])  # s1 lives in d1
    with pytest.raises(IntegrityError, match="belongs to"):
        load_corpus(docs, scopes, qb)


def test_duplicate_ids_rejected(tmp_path):
    docs = tmp_path / "d.jsonl"
    scopes = tmp_path / "s.jsonl"
    qb = tmp_path / "q.jsonl"
    write_jsonl(docs, TINY_DOCS + TINY_DOCS[:1])
    write_jsonl(scopes, [])
    write_jsonl(qb, [])
    with pytest.raises(IntegrityError, match="duplicate"):
        load_corpus(docs, scopes, qb)


def test_unknown_field_rejected(tmp_path):
    docs = tmp_path / "d.jsonl"
    scopes = tmp_path / "s.jsonl"
    qb = tmp_path / "q.jsonl"
    write_jsonl(docs, [{**TINY_DOCS[0], "extra": 1}])
    write_jsonl(scopes, [])
    write_jsonl(qb, [])
    with pytest.raises(ParseError, match="unknown fields"):
        load_corpus(docs, scopes, qb)


def test_parse_error_names_line(tmp_path):
    docs = tmp_path / "d.jsonl"
    docs.write_text('{"id": "d1", "title": "t", "paragraphs": ["p"]}\nnot json\n')
    scopes = tmp_path / "s.jsonl"
    qb = tmp_path / "q.jsonl"
    scopes.write_text("")
    qb.write_text("")
    with pytest.raises(ParseError, match=":2:"):
        load_corpus(docs, scopes, qb)


def test_orphan_scope_warns(tmp_path):
    docs = tmp_path / "d.jsonl"
    scopes = tmp_path / "s.jsonl"
    qb = tmp_path / "q.jsonl"
    write_jsonl(docs, TINY_DOCS)
    write_jsonl(scopes, TINY_SCOPES)
    write_jsonl(qb, TINY_QB[:1])  # s2, s3 become orphans
    with pytest.warns(UserWarning, match="no QB entry"):
        load_corpus(docs, scopes, qb)


def test_scope_text(tiny_corpus):
    assert scope_text(tiny_corpus, "s1") == "A"
    assert scope_text(tiny_corpus, "s2") == "B\nC"
    assert scope_text(tiny_corpus, "s3") == "Offer and acceptance\nConsideration"
    with pytest.raises(UnknownScope):
        scope_text(tiny_corpus, "nope")


def test_question_set(tiny_corpus):
    assert question_set(tiny_corpus, "d1") == ["e1", "e2"]
    assert question_set(tiny_corpus, "d2") == ["e3", "e4"]
    with pytest.raises(UnknownDocument):
        question_set(tiny_corpus, "nope")


def test_scope_set(tiny_corpus):
    assert scope_set(tiny_corpus, "d1") == ["s1", "s2"]
    assert scope_set(tiny_corpus, "d2") == ["s3"]
    with pytest.raises(UnknownDocument):
        scope_set(tiny_corpus, "nope")


def test_questions_for_scope(tiny_corpus):
    assert questions_for_scope(tiny_corpus, "s3") == ["e3", "e4"]
    assert questions_for_scope(tiny_corpus, "s1") == ["e1"]
    with pytest.raises(UnknownScope):
        questions_for_scope(tiny_corpus, "nope")


def test_round_trip(tiny_corpus, tmp_path):
    docs = tmp_path / "out_d.jsonl"
    scopes = tmp_path / "out_s.jsonl"
    qb = tmp_path / "out_q.jsonl"
    save_corpus(tiny_corpus, docs, scopes, qb)
    reloaded = load_corpus(docs, scopes, qb)
    assert reloaded == tiny_corpus


def test_question_sets_partition_qb(tiny_corpus):
    all_ids = []
    for doc_id in tiny_corpus.doc_ids():
        all_ids.extend(question_set(tiny_corpus, doc_id))
    assert sorted(all_ids) == tiny_corpus.entry_ids()
    assert len(all_ids) == len(set(all_ids))


def test_entry_membership_invariant(tiny_corpus):
    for entry in tiny_corpus.qb.values():
        assert entry.id in questions_for_scope(tiny_corpus, entry.scope_id)
        assert entry.id in question_set(tiny_corpus, entry.doc_id)

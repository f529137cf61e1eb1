import math

import numpy as np
import pytest

from qbr.adapter import Adapter, identity_adapter
from qbr.cl_trainer import (StubLLM, TrainConfig, TrainingExample, augment,
                            augment_dataset, build_all_examples, build_examples,
                            load_trainset, loss, loss_grad, save_trainset,
                            select_hard_scopes, train)
from qbr.corpus import Corpus, Document, QBEntry, Scope, questions_for_scope, scope_set
from qbr.embedding import HashEmbedder, PrecomputedProvider, cosine
from qbr.errors import (EmptyGeneration, EmptyTrainingSet, InvalidTemperature,
                        TooFewScopes, UnknownDocument)
from qbr.synth import gen_synthetic

LN2 = 0.6931471805599453
# -log(e / (e + 1)), evaluated independently with mpmath before the build
POS1_NEG0_TAU1 = 0.31326168751822286


def mini_corpus(paragraph_lists, questions):
    """questions: list of (entry_id, doc_idx, scope local idx, text)."""
    documents, scopes, qb = {}, {}, {}
    for i, paras in enumerate(paragraph_lists):
        doc_id = f"d{i}"
        documents[doc_id] = Document(id=doc_id, title=doc_id, paragraphs=tuple(paras))
        for m in range(len(paras)):
            sid = f"d{i}s{m}"
            scopes[sid] = Scope(id=sid, doc_id=doc_id, start_para=m, end_para=m)
    for eid, doc_idx, scope_idx, text in questions:
        qb[eid] = QBEntry(id=eid, question=text, doc_id=f"d{doc_idx}",
                          scope_id=f"d{doc_idx}s{scope_idx}", source="human")
    return Corpus(documents=documents, scopes=scopes, qb=qb)


def orthogonal_provider(mapping):
    vectors = {k: np.asarray(v, dtype=float) for k, v in mapping.items()}
    dim = len(next(iter(vectors.values())))
    return PrecomputedProvider(vectors, dim, f"fixture/dim={dim}")


# ---------------------------------------------------------------- examples

def test_build_examples_tiny(tiny_corpus):
    d1 = build_examples(tiny_corpus, "d1")
    assert len(d1) == 2
    by_pos = {ex.positive_scope_id: ex for ex in d1}
    assert by_pos["s1"].negative_scope_ids == ("s2",)
    assert by_pos["s2"].negative_scope_ids == ("s1",)
    assert by_pos["s1"].anchor_text == "What is libel?"


def test_build_examples_single_scope_doc(tiny_corpus):
    d2 = build_examples(tiny_corpus, "d2")
    assert len(d2) == 2
    assert all(ex.negative_scope_ids == () for ex in d2)


def test_build_examples_unknown_doc(tiny_corpus):
    with pytest.raises(UnknownDocument):
        build_examples(tiny_corpus, "nope")


def test_example_counting_oracle():
    # bookkeeping identity checked against direct counting over the corpus
    for seed in range(5):
        rng = np.random.default_rng(seed)
        corpus, _ = gen_synthetic(int(rng.integers(2, 8)), int(rng.integers(1, 6)),
                                  int(rng.integers(1, 4)), 0.5, seed=seed)
        examples = build_all_examples(corpus)
        n_pos = len(examples)
        n_neg = sum(len(ex.negative_scope_ids) for ex in examples)
        assert n_pos == len(corpus.qb)
        expected_neg = 0
        for scope_id in corpus.scope_ids():
            r_s = len(questions_for_scope(corpus, scope_id))
            s_d = len(scope_set(corpus, corpus.scopes[scope_id].doc_id))
            expected_neg += r_s * (s_d - 1)
        assert n_neg == expected_neg


def test_build_examples_all_pairs(tiny_corpus):
    from dataclasses import replace
    # give s1 a second question so the all-pairs reading adds cross terms
    extra = QBEntry(id="e9", question="Another libel question?", doc_id="d1",
                    scope_id="s1", source="human")
    corpus = replace(tiny_corpus, qb={**tiny_corpus.qb, "e9": extra})
    examples = build_examples(corpus, "d1", all_pairs=True)
    ex_e1 = next(ex for ex in examples if ex.anchor_text == "What is libel?")
    # the other anchor of s1 paired with s1's single negative
    assert ex_e1.extra_negative_pairs == (("Another libel question?", "s2"),)


# ---------------------------------------------------------- hard scopes

def test_select_hard_scopes_brute_force(provider):
    corpus = mini_corpus(
        [["alpha beta gamma delta", "alpha beta gamma epsilon", "zeta eta theta iota"]],
        [("e1", 0, 0, "q")])
    result = select_hard_scopes(corpus, provider, "d0")
    # brute-force oracle over all three pairs
    from qbr.corpus import scope_text
    sids = scope_set(corpus, "d0")
    best = max(((sids[i], sids[j]) for i in range(3) for j in range(i + 1, 3)),
               key=lambda pair: cosine(provider.embed(scope_text(corpus, pair[0])),
                                       provider.embed(scope_text(corpus, pair[1]))))
    assert result == best == ("d0s0", "d0s1")


def test_select_hard_scopes_two_scopes(provider):
    corpus = mini_corpus([["a b", "c d"]], [])
    assert select_hard_scopes(corpus, provider, "d0") == ("d0s0", "d0s1")


def test_select_hard_scopes_too_few(provider):
    corpus = mini_corpus([["only one"]], [])
    with pytest.raises(TooFewScopes):
        select_hard_scopes(corpus, provider, "d0")


# ------------------------------------------------------------- augment

def test_augment_stub_contract():
    out = augment(StubLLM(), "What is libel?", 2, question_id="e1")
    assert [a.text for a in out] == ["Scenario 1: What is libel?",
                                    "Scenario 2: What is libel?"]
    assert all(a.origin_question_id == "e1" for a in out)


def test_augment_rejects_n_zero():
    with pytest.raises(ValueError):
        augment(StubLLM(), "q", 0)


def test_augment_empty_generation():
    class EmptyLLM:
        def generate(self, prompt):
            return ""

    with pytest.raises(EmptyGeneration):
        augment(EmptyLLM(), "q", 1)


def test_augment_dataset_counts(provider):
    corpus = mini_corpus([["alpha beta", "alpha gamma"]],
                         [("e1", 0, 0, "first question"),
                          ("e2", 0, 1, "second question")])
    examples = augment_dataset(corpus, provider, StubLLM(), 2)
    assert len(examples) == 4  # 2 hard scopes x 1 question x 2 generations
    assert all(ex.anchor_text.startswith("Scenario ") for ex in examples)


def test_augment_dataset_skips_single_scope_docs(provider):
    corpus = mini_corpus([["single paragraph"]], [("e1", 0, 0, "q")])
    assert augment_dataset(corpus, provider, StubLLM(), 3) == []


def test_augment_dataset_counting_oracle(provider):
    corpus, _ = gen_synthetic(4, 3, 2, 0.5, seed=9)
    n = 2
    examples = augment_dataset(corpus, provider, StubLLM(), n)
    expected = 0
    for doc_id in corpus.doc_ids():
        hard = select_hard_scopes(corpus, provider, doc_id)
        for s in hard:
            expected += len(questions_for_scope(corpus, s)) * n
    assert len(examples) == expected


# ---------------------------------------------------------------- loss

def test_loss_zero_negatives(tiny_corpus, provider):
    ex = TrainingExample("any anchor", "s3", (), "d2")
    ident = identity_adapter(provider.dim, provider.fingerprint)
    assert loss(ex, tiny_corpus, provider, ident, 0.1) == 0.0


def test_loss_equal_pos_neg_is_ln2(provider):
    corpus = mini_corpus([["same text", "same text"]], [("e1", 0, 0, "q")])
    ex = TrainingExample("q", "d0s0", ("d0s1",), "d0")
    ident = identity_adapter(provider.dim, provider.fingerprint)
    assert loss(ex, corpus, provider, ident, 0.1) == pytest.approx(LN2, abs=1e-12)


def test_loss_unit_pos_zero_neg_tau1():
    prov = orthogonal_provider({"A": [1, 0], "P": [1, 0], "N": [0, 1]})
    corpus = mini_corpus([["P", "N"]], [("e1", 0, 0, "A")])
    ex = TrainingExample("A", "d0s0", ("d0s1",), "d0")
    ident = identity_adapter(2, prov.fingerprint)
    assert loss(ex, corpus, prov, ident, 1.0) == pytest.approx(POS1_NEG0_TAU1, abs=1e-12)


def test_loss_invalid_temperature(tiny_corpus, provider):
    ex = TrainingExample("q", "s1", ("s2",), "d1")
    ident = identity_adapter(provider.dim, provider.fingerprint)
    with pytest.raises(InvalidTemperature):
        loss(ex, tiny_corpus, provider, ident, 0.0)


def test_loss_nonnegative_random(provider):
    corpus, _ = gen_synthetic(3, 4, 2, 0.6, seed=3)
    ident = identity_adapter(provider.dim, provider.fingerprint)
    rng = np.random.default_rng(0)
    adapter = Adapter(matrix=np.eye(provider.dim) + 0.2 * rng.normal(size=(provider.dim,) * 2),
                      bias=0.05 * rng.normal(size=provider.dim),
                      provider_fingerprint=provider.fingerprint)
    for ex in build_all_examples(corpus)[:10]:
        assert loss(ex, corpus, provider, ident, 0.1) >= 0.0
        assert loss(ex, corpus, provider, adapter, 0.1) >= 0.0


def test_loss_monotone_in_positive_similarity():
    # anchor-positive cosine sweeps up while the negative stays orthogonal
    values = []
    for angle in (1.2, 0.9, 0.6, 0.3, 0.0):
        prov = orthogonal_provider({
            "A": [1, 0, 0], "P": [math.cos(angle), 0, math.sin(angle)], "N": [0, 1, 0]})
        corpus = mini_corpus([["P", "N"]], [("e1", 0, 0, "A")])
        ex = TrainingExample("A", "d0s0", ("d0s1",), "d0")
        values.append(loss(ex, corpus, prov, identity_adapter(3, prov.fingerprint), 0.5))
    assert all(a > b for a, b in zip(values, values[1:]))


def test_loss_temperature_sharpening():
    # with z_pos > z_neg, a smaller temperature sharpens the softmax and
    # shrinks the loss
    prov = orthogonal_provider({"A": [1, 0], "P": [1, 0], "N": [0, 1]})
    corpus = mini_corpus([["P", "N"]], [("e1", 0, 0, "A")])
    ex = TrainingExample("A", "d0s0", ("d0s1",), "d0")
    ident = identity_adapter(2, prov.fingerprint)
    l_01 = loss(ex, corpus, prov, ident, 0.1)
    l_05 = loss(ex, corpus, prov, ident, 0.5)
    l_10 = loss(ex, corpus, prov, ident, 1.0)
    assert l_01 < l_05 < l_10


# ------------------------------------------------------------- gradient

def numeric_grad(ex, corpus, provider, adapter, tau, eps=1e-4):
    """Central finite differences over every adapter parameter."""
    dim = adapter.dim
    grad_a = np.zeros((dim, dim))
    grad_b = np.zeros(dim)

    def loss_at(matrix, bias):
        return loss(ex, corpus, provider,
                    Adapter(matrix=matrix, bias=bias,
                            provider_fingerprint=adapter.provider_fingerprint), tau)

    for r in range(dim):
        for c in range(dim):
            up = adapter.matrix.copy()
            down = adapter.matrix.copy()
            up[r, c] += eps
            down[r, c] -= eps
            grad_a[r, c] = (loss_at(up, adapter.bias) - loss_at(down, adapter.bias)) / (2 * eps)
    for r in range(dim):
        up = adapter.bias.copy()
        down = adapter.bias.copy()
        up[r] += eps
        down[r] -= eps
        grad_b[r] = (loss_at(adapter.matrix, up) - loss_at(adapter.matrix, down)) / (2 * eps)
    return grad_a, grad_b


def assert_grad_close(analytic, numeric, rel=1e-3, floor=1e-8):
    scale = np.maximum(np.abs(numeric), floor)
    assert np.max(np.abs(analytic - numeric) / scale) < rel


def test_grad_zero_negatives(tiny_corpus, provider):
    ex = TrainingExample("anchor", "s3", (), "d2")
    ident = identity_adapter(provider.dim, provider.fingerprint)
    ga, gb = loss_grad(ex, tiny_corpus, provider, ident, 0.1)
    np.testing.assert_array_equal(ga, np.zeros_like(ga))
    np.testing.assert_array_equal(gb, np.zeros_like(gb))


def test_grad_matches_finite_differences():
    prov = HashEmbedder(8)
    corpus, _ = gen_synthetic(2, 3, 2, 0.5, seed=4)
    examples = build_all_examples(corpus)
    rng = np.random.default_rng(11)
    for i in range(6):
        ex = examples[int(rng.integers(len(examples)))]
        adapter = Adapter(
            matrix=np.eye(8) + 0.3 * rng.normal(size=(8, 8)),
            bias=0.1 * rng.normal(size=8),
            provider_fingerprint=prov.fingerprint)
        tau = float(rng.uniform(0.1, 1.0))
        ga, gb = loss_grad(ex, corpus, prov, adapter, tau)
        na, nb = numeric_grad(ex, corpus, prov, adapter, tau)
        assert_grad_close(ga, na)
        assert_grad_close(gb, nb)


def test_grad_all_pairs_terms_finite_differences():
    prov = HashEmbedder(8)
    corpus, _ = gen_synthetic(2, 3, 2, 0.5, seed=4)
    ex = build_all_examples(corpus, all_pairs=True)[0]
    assert ex.extra_negative_pairs
    rng = np.random.default_rng(1)
    adapter = Adapter(matrix=np.eye(8) + 0.2 * rng.normal(size=(8, 8)),
                      bias=0.05 * rng.normal(size=8),
                      provider_fingerprint=prov.fingerprint)
    ga, gb = loss_grad(ex, corpus, prov, adapter, 0.3)
    na, nb = numeric_grad(ex, corpus, prov, adapter, 0.3)
    assert_grad_close(ga, na)
    assert_grad_close(gb, nb)


def test_grad_symmetric_scopes_cancel(provider):
    # positive and negative scopes embed identically: the softmax pulls and
    # pushes the same vector equally, so the gradient vanishes
    corpus = mini_corpus([["same text", "same text"]], [("e1", 0, 0, "anchor words")])
    ex = TrainingExample("anchor words", "d0s0", ("d0s1",), "d0")
    ident = identity_adapter(provider.dim, provider.fingerprint)
    ga, gb = loss_grad(ex, corpus, provider, ident, 0.2)
    assert np.max(np.abs(ga)) < 1e-12
    assert np.max(np.abs(gb)) < 1e-12


# ---------------------------------------------------------------- train

def test_train_zero_lr_is_identity(provider):
    corpus, _ = gen_synthetic(2, 2, 1, 0.5, seed=5)
    examples = build_all_examples(corpus)
    result = train(examples, corpus, provider,
                   TrainConfig(learning_rate=0.0, epochs=2))
    np.testing.assert_array_equal(result.adapter.matrix, np.eye(provider.dim))
    np.testing.assert_array_equal(result.adapter.bias, np.zeros(provider.dim))


def test_train_deterministic(provider):
    corpus, _ = gen_synthetic(3, 3, 1, 0.5, seed=6)
    examples = build_all_examples(corpus)
    config = TrainConfig(epochs=2, seed=123)
    a = train(examples, corpus, provider, config)
    b = train(examples, corpus, provider, config)
    np.testing.assert_array_equal(a.adapter.matrix, b.adapter.matrix)
    np.testing.assert_array_equal(a.adapter.bias, b.adapter.bias)
    assert a.epoch_losses == b.epoch_losses


def test_train_loss_decreases_on_separable_set(provider):
    corpus, _ = gen_synthetic(5, 3, 2, 0.6, seed=7)
    examples = build_all_examples(corpus)
    result = train(examples, corpus, provider,
                   TrainConfig(learning_rate=0.2, epochs=4, seed=0))
    assert result.epoch_losses[-1] < result.epoch_losses[0]


def test_train_empty_set(tiny_corpus, provider):
    with pytest.raises(EmptyTrainingSet):
        train([], tiny_corpus, provider, TrainConfig())


def test_train_identity_start_preserves_ranking(provider):
    # an untrained adapter must not change any scope ordering
    from qbr.retrieval import rank_scopes
    corpus, _ = gen_synthetic(3, 4, 1, 0.7, seed=8)
    ident = identity_adapter(provider.dim, provider.fingerprint)
    from qbr.corpus import scope_text
    for doc_id in corpus.doc_ids():
        for query in ("some query words", scope_text(corpus, f"{doc_id}-s0")):
            ranked = rank_scopes(corpus, provider, ident, query, doc_id)
            base = sorted(((s, cosine(provider.embed(query),
                                      provider.embed(scope_text(corpus, s))))
                           for s in scope_set(corpus, doc_id)),
                          key=lambda p: (-p[1], p[0]))
            assert [s for s, _ in ranked] == [s for s, _ in base]


# ------------------------------------------------------------ trainset io

def test_trainset_round_trip(tmp_path, tiny_corpus):
    examples = build_all_examples(tiny_corpus, all_pairs=False)
    examples.append(TrainingExample("anchor", "s1", ("s2",), "d1",
                                    extra_negative_pairs=(("other", "s2"),)))
    path = tmp_path / "trainset.jsonl"
    save_trainset(examples, path)
    assert load_trainset(path) == examples

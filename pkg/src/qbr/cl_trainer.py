"""Contrastive training of the embedding adapter.

Training examples pair an anchor (a bank question, or a synthesized
layperson scenario) with its answer scope as the positive and the other
scopes of the same document as negatives. The softmax contrastive loss is
minimized by mini-batch gradient descent on the adapter's affine
parameters, with analytically derived gradients chained through the
renormalization and through cosine on both the anchor and scope branches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import requests

from .adapter import Adapter
from .corpus import Corpus, questions_for_scope, scope_set, scope_text
from .embedding import EmbeddingProvider, cosine
from .errors import (EmptyGeneration, EmptyTrainingSet, InvalidTemperature,
                     ParseError, ProtocolError, TooFewScopes, TransportError,
                     UnknownDocument)

PROMPT_TEMPLATE = ("Given the following context, provide a realistic real-life "
                   "scenario that a person who knows nothing about legal knowledge "
                   "might encounter. Context: {q}.")


@dataclass(frozen=True)
class TrainingExample:
    anchor_text: str
    positive_scope_id: str
    negative_scope_ids: tuple[str, ...]
    doc_id: str
    # populated only under the all-pairs loss reading: additional denominator
    # terms whose anchor differs from this example's anchor
    extra_negative_pairs: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class AugmentedInput:
    text: str
    origin_question_id: str


@dataclass
class TrainConfig:
    temperature: float = 0.1
    learning_rate: float = 0.05
    epochs: int = 5
    batch_size: int = 32
    seed: int = 0
    augment_per_scope: int = 0

    def validate(self) -> None:
        if not 0.0 < self.temperature <= 1.0:
            raise InvalidTemperature(f"temperature must be in (0, 1], got {self.temperature}")
        if self.learning_rate < 0.0:
            # 0 is allowed: a no-op run that returns the identity adapter
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.augment_per_scope < 0:
            raise ValueError("augment_per_scope must be >= 0")


@dataclass
class TrainResult:
    adapter: Adapter
    epoch_losses: list[float] = field(default_factory=list)


def build_examples(corpus: Corpus, doc_id: str, all_pairs: bool = False) -> list[TrainingExample]:
    """One example per (scope, question) of the document: positive is the
    scope, negatives are the document's other scopes in ascending id order."""
    if doc_id not in corpus.documents:
        raise UnknownDocument(doc_id)
    scope_ids = scope_set(corpus, doc_id)
    examples: list[TrainingExample] = []
    for scope_id in scope_ids:
        negatives = tuple(s for s in scope_ids if s != scope_id)
        anchors = questions_for_scope(corpus, scope_id)
        for entry_id in anchors:
            extras: tuple[tuple[str, str], ...] = ()
            if all_pairs:
                extras = tuple((corpus.qb[other].question, neg)
                               for other in anchors if other != entry_id
                               for neg in negatives)
            examples.append(TrainingExample(
                anchor_text=corpus.qb[entry_id].question,
                positive_scope_id=scope_id,
                negative_scope_ids=negatives,
                doc_id=doc_id,
                extra_negative_pairs=extras))
    return examples


def build_all_examples(corpus: Corpus, all_pairs: bool = False) -> list[TrainingExample]:
    examples: list[TrainingExample] = []
    for doc_id in corpus.doc_ids():
        examples.extend(build_examples(corpus, doc_id, all_pairs=all_pairs))
    return examples


def select_hard_scopes(corpus: Corpus, provider: EmbeddingProvider,
                       doc_id: str) -> tuple[str, str]:
    """The document's most mutually similar scope pair under base embeddings."""
    if doc_id not in corpus.documents:
        raise UnknownDocument(doc_id)
    scope_ids = scope_set(corpus, doc_id)
    if len(scope_ids) < 2:
        raise TooFewScopes(f"document {doc_id!r} has {len(scope_ids)} scope(s)")
    vecs = [provider.embed(scope_text(corpus, s)) for s in scope_ids]
    best_pair, best_sim = None, -np.inf
    for i in range(len(scope_ids)):
        for j in range(i + 1, len(scope_ids)):
            sim = cosine(vecs[i], vecs[j])
            if sim > best_sim:  # strict, so ties keep the smallest id pair
                best_pair, best_sim = (scope_ids[i], scope_ids[j]), sim
    return best_pair


class StubLLM:
    """Deterministic in-tree generator; numbers its outputs per prompt."""

    def __init__(self):
        self._counts: dict[str, int] = {}

    def generate(self, prompt: str) -> str:
        n = self._counts.get(prompt, 0) + 1
        self._counts[prompt] = n
        context = prompt
        marker = "Context: "
        if marker in prompt:
            context = prompt.split(marker, 1)[1]
            if context.endswith("."):
                context = context[:-1]
        return f"Scenario {n}: {context}"


class RemoteLLM:
    """Client for a POST {"prompt": ...} -> {"text": ...} generation service."""

    def __init__(self, endpoint: str, timeout: float = 60.0, session=None):
        self.endpoint = endpoint
        self.timeout = timeout
        self._session = session or requests.Session()

    def generate(self, prompt: str) -> str:
        try:
            resp = self._session.post(self.endpoint, json={"prompt": prompt},
                                      timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"llm endpoint unreachable: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise TransportError(f"llm endpoint returned {resp.status_code}")
        try:
            text = resp.json()["text"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"bad llm payload: {exc}") from exc
        if not isinstance(text, str):
            raise ProtocolError("llm payload 'text' is not a string")
        return text


def augment(llm, question: str, n: int, question_id: str = "") -> list[AugmentedInput]:
    """Generate n layperson-style inputs for one bank question."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    prompt = PROMPT_TEMPLATE.format(q=question)
    out: list[AugmentedInput] = []
    for _ in range(n):
        text = llm.generate(prompt)
        if not text or not text.strip():
            raise EmptyGeneration(f"empty generation for question {question_id or question!r}")
        out.append(AugmentedInput(text=text, origin_question_id=question_id))
    return out


def augment_dataset(corpus: Corpus, provider: EmbeddingProvider, llm,
                    n_per_scope: int) -> list[TrainingExample]:
    """Augmented examples targeting each document's two hardest scopes."""
    if n_per_scope < 1:
        return []
    examples: list[TrainingExample] = []
    for doc_id in corpus.doc_ids():
        scope_ids = scope_set(corpus, doc_id)
        if len(scope_ids) < 2:
            continue
        hard = select_hard_scopes(corpus, provider, doc_id)
        for scope_id in sorted(hard):
            negatives = tuple(s for s in scope_ids if s != scope_id)
            for entry_id in questions_for_scope(corpus, scope_id):
                for aug in augment(llm, corpus.qb[entry_id].question, n_per_scope, entry_id):
                    examples.append(TrainingExample(
                        anchor_text=aug.text, positive_scope_id=scope_id,
                        negative_scope_ids=negatives, doc_id=doc_id))
    return examples


def save_trainset(examples: list[TrainingExample], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            rec = {"anchor_text": ex.anchor_text,
                   "positive_scope_id": ex.positive_scope_id,
                   "negative_scope_ids": list(ex.negative_scope_ids),
                   "doc_id": ex.doc_id}
            if ex.extra_negative_pairs:
                rec["extra_negative_pairs"] = [list(p) for p in ex.extra_negative_pairs]
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_trainset(path) -> list[TrainingExample]:
    examples: list[TrainingExample] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                examples.append(TrainingExample(
                    anchor_text=rec["anchor_text"],
                    positive_scope_id=rec["positive_scope_id"],
                    negative_scope_ids=tuple(rec["negative_scope_ids"]),
                    doc_id=rec["doc_id"],
                    extra_negative_pairs=tuple(
                        (p[0], p[1]) for p in rec.get("extra_negative_pairs", []))))
            except (ValueError, KeyError, TypeError, IndexError) as exc:
                raise ParseError(f"{path}:{lineno}: bad training example: {exc}") from exc
    return examples


def _example_terms(example: TrainingExample, corpus: Corpus) -> list[tuple[str, str]]:
    """(anchor_text, target_text) pairs: positive first, then negatives."""
    terms = [(example.anchor_text, scope_text(corpus, example.positive_scope_id))]
    for scope_id in example.negative_scope_ids:
        terms.append((example.anchor_text, scope_text(corpus, scope_id)))
    for anchor, scope_id in example.extra_negative_pairs:
        terms.append((anchor, scope_text(corpus, scope_id)))
    return terms


class _EmbedCache:
    """Memoizes the frozen base embedding per text."""

    def __init__(self, provider: EmbeddingProvider):
        self._provider = provider
        self._cache: dict[str, np.ndarray] = {}

    def get(self, text: str) -> np.ndarray:
        vec = self._cache.get(text)
        if vec is None:
            vec = self._provider.embed(text)
            self._cache[text] = vec
        return vec


def _loss_and_grad(terms: list[tuple[str, str]], cache: _EmbedCache,
                   matrix: np.ndarray, bias: np.ndarray, tau: float,
                   want_grad: bool) -> tuple[float, np.ndarray | None, np.ndarray | None]:
    texts = sorted({t for pair in terms for t in pair})
    text_idx = {t: i for i, t in enumerate(texts)}
    base = np.stack([cache.get(t) for t in texts])          # (m, dim)
    ys = base @ matrix.T + bias                             # (m, dim)
    norms = np.linalg.norm(ys, axis=1)
    units = np.where(norms[:, None] > 0.0, ys / np.where(norms[:, None] > 0.0,
                                                         norms[:, None], 1.0), ys)

    pairs = [(text_idx[a], text_idx[s]) for a, s in terms]
    sims = np.array([float(units[ai] @ units[si]) for ai, si in pairs])
    z = sims / tau
    zmax = z.max()
    lse = zmax + np.log(np.exp(z - zmax).sum())
    loss = float(lse - z[0])

    if not want_grad:
        return loss, None, None

    p = np.exp(z - lse)
    coeff = p.copy()
    coeff[0] -= 1.0
    coeff /= tau

    dim = bias.size
    grad_a = np.zeros((dim, dim))
    grad_b = np.zeros(dim)
    for c, (ai, si) in zip(coeff, pairs):
        if c == 0.0:
            continue
        sim = units[ai] @ units[si]
        # anchor branch: d sim / d y_a = (g_s - sim * g_a) / ||y_a||
        if norms[ai] > 0.0:
            d = (units[si] - sim * units[ai]) / norms[ai]
            grad_a += c * np.outer(d, base[ai])
            grad_b += c * d
        # scope branch, symmetric
        if norms[si] > 0.0:
            d = (units[ai] - sim * units[si]) / norms[si]
            grad_a += c * np.outer(d, base[si])
            grad_b += c * d
    return loss, grad_a, grad_b


def loss(example: TrainingExample, corpus: Corpus, provider: EmbeddingProvider,
         adapter: Adapter, tau: float) -> float:
    """Softmax contrastive loss of one example under the current adapter."""
    if tau <= 0.0:
        raise InvalidTemperature(f"temperature must be positive, got {tau}")
    cache = _EmbedCache(provider)
    value, _, _ = _loss_and_grad(_example_terms(example, corpus), cache,
                                 adapter.matrix, adapter.bias, tau, want_grad=False)
    return value


def loss_grad(example: TrainingExample, corpus: Corpus, provider: EmbeddingProvider,
              adapter: Adapter, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of the loss with respect to the adapter matrix and bias."""
    if tau <= 0.0:
        raise InvalidTemperature(f"temperature must be positive, got {tau}")
    cache = _EmbedCache(provider)
    _, grad_a, grad_b = _loss_and_grad(_example_terms(example, corpus), cache,
                                       adapter.matrix, adapter.bias, tau, want_grad=True)
    return grad_a, grad_b


def train(examples: list[TrainingExample], corpus: Corpus,
          provider: EmbeddingProvider, config: TrainConfig) -> TrainResult:
    """Mini-batch gradient descent from the identity adapter.

    Shuffling is driven by the configured seed, updates use the mean batch
    gradient, and the returned trace holds one mean loss per epoch.
    """
    config.validate()
    if not examples:
        raise EmptyTrainingSet("no training examples")
    cache = _EmbedCache(provider)
    term_lists = [_example_terms(ex, corpus) for ex in examples]
    dim = provider.dim
    matrix = np.eye(dim)
    bias = np.zeros(dim)
    rng = np.random.default_rng(config.seed)
    n = len(examples)
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            grad_a = np.zeros((dim, dim))
            grad_b = np.zeros(dim)
            for idx in batch:
                value, ga, gb = _loss_and_grad(term_lists[idx], cache, matrix, bias,
                                               config.temperature, want_grad=True)
                total_loss += value
                grad_a += ga
                grad_b += gb
            matrix = matrix - config.learning_rate * grad_a / len(batch)
            bias = bias - config.learning_rate * grad_b / len(batch)
        epoch_losses.append(total_loss / n)
    return TrainResult(adapter=Adapter(matrix=matrix, bias=bias,
                                       provider_fingerprint=provider.fingerprint),
                       epoch_losses=epoch_losses)

"""Question-bank mediated two-step retrieval engine."""

from .adapter import Adapter, identity_adapter, load_adapter, save_adapter
from .cl_trainer import (TrainConfig, TrainingExample, TrainResult,
                         build_all_examples, build_examples, train)
from .corpus import (Corpus, Document, QBEntry, Scope, doc_text, load_corpus,
                     question_set, questions_for_scope, save_corpus, scope_set,
                     scope_text)
from .embedding import (EmbeddingProvider, HashEmbedder, PrecomputedProvider,
                        RemoteProvider, cosine, embed_hash, load_precomputed,
                        tokenize)
from .evaluation import EvalReport, TestCase, evaluate, load_testset, save_testset
from .retrieval import QSResult, display_question, rank_scopes, search, select_documents
from .synth import gen_synthetic
from .vindex import PairIndex, ScoredHit, build_index, load_index, pair_text, save_index, top_k

__version__ = "0.1.0"

__all__ = [
    "Adapter", "Corpus", "Document", "EmbeddingProvider", "EvalReport",
    "HashEmbedder", "PairIndex", "PrecomputedProvider", "QBEntry", "QSResult",
    "RemoteProvider", "Scope", "ScoredHit", "TestCase", "TrainConfig",
    "TrainResult", "TrainingExample", "build_all_examples", "build_examples",
    "build_index", "cosine", "display_question", "doc_text", "embed_hash",
    "evaluate", "gen_synthetic", "identity_adapter", "load_adapter",
    "load_corpus", "load_index", "load_precomputed", "load_testset",
    "pair_text", "question_set", "questions_for_scope", "rank_scopes",
    "save_adapter", "save_corpus", "save_index", "save_testset", "scope_set",
    "scope_text", "search", "select_documents", "tokenize", "top_k", "train",
]

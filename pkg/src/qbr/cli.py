"""Command-line lifecycle driver: ingest, index, train, search, evaluate, serve.

Exit codes: 0 success, 2 data or runtime error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import cl_trainer, evaluation, synth
from .adapter import identity_adapter, load_adapter, save_adapter
from .corpus import load_corpus, save_corpus
from .embedding import HashEmbedder, load_precomputed
from .errors import QBRError
from .evaluation import load_testset, save_testset
from .retrieval import search as run_search
from .vindex import build_index, load_index, save_index

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--docs", required=True)
    p.add_argument("--scopes", required=True)
    p.add_argument("--qb", required=True)


def _add_provider_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=256,
                   help="hash embedder dimension (default 256)")
    p.add_argument("--precomputed", default=None,
                   help="path to a precomputed vector store instead of the hash embedder")


def _provider(args):
    if args.precomputed:
        return load_precomputed(args.precomputed)
    return HashEmbedder(args.dim)


def build_parser() -> _Parser:
    parser = _Parser(prog="qbr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus triple")
    _add_corpus_flags(p)

    p = sub.add_parser("build-index", help="embed question-scope pairs into an index")
    _add_corpus_flags(p)
    _add_provider_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("make-trainset", help="export contrastive training examples")
    _add_corpus_flags(p)
    _add_provider_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--augment", type=int, default=0, metavar="N",
                   help="stub-augmented inputs per hard scope question")
    p.add_argument("--all-pairs", action="store_true",
                   help="use the all-pairs denominator reading")

    p = sub.add_parser("train", help="train the embedding adapter")
    _add_corpus_flags(p)
    _add_provider_flags(p)
    p.add_argument("--trainset", required=True)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-csv", default=None)

    p = sub.add_parser("search", help="run a query through the two-step pipeline")
    _add_corpus_flags(p)
    _add_provider_flags(p)
    p.add_argument("--index", required=True)
    p.add_argument("--adapter", default=None)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--json", action="store_true")

    for name in ("eval", "compare"):
        p = sub.add_parser(name)
        _add_corpus_flags(p)
        _add_provider_flags(p)
        p.add_argument("--index", required=True)
        p.add_argument("--adapter", default=None)
        p.add_argument("--testset", required=True)
        p.add_argument("--cutoff", type=int, default=5)
        p.add_argument("--out", default=None, help="write the JSON report here")

    p = sub.add_parser("serve", help="start the HTTP API")
    _add_corpus_flags(p)
    _add_provider_flags(p)
    p.add_argument("--index", default=None)
    p.add_argument("--adapter", default=None)
    p.add_argument("--listen", default=None, help="host:port (default 127.0.0.1:8080)")
    p.add_argument("--k", type=int, default=None, help="default result count")
    p.add_argument("--cors-origin", action="append", default=[])

    p = sub.add_parser("gen-synthetic", help="generate a planted corpus triple")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--docs", type=int, default=50)
    p.add_argument("--scopes-per-doc", type=int, default=5)
    p.add_argument("--questions-per-scope", type=int, default=3)
    p.add_argument("--overlap", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _load(args):
    return load_corpus(args.docs, args.scopes, args.qb)


def _cmd_ingest(args) -> int:
    corpus = _load(args)
    print(f"{len(corpus.documents)} docs / {len(corpus.scopes)} scopes / "
          f"{len(corpus.qb)} entries")
    return EXIT_OK


def _cmd_build_index(args) -> int:
    corpus = _load(args)
    index = build_index(corpus, _provider(args))
    save_index(index, args.out)
    print(f"wrote {len(index)} rows to {args.out}")
    return EXIT_OK


def _cmd_make_trainset(args) -> int:
    if args.augment < 0:
        raise _UsageError("--augment must be >= 0")
    corpus = _load(args)
    provider = _provider(args)
    examples = cl_trainer.build_all_examples(corpus, all_pairs=args.all_pairs)
    if args.augment:
        examples += cl_trainer.augment_dataset(corpus, provider,
                                               cl_trainer.StubLLM(), args.augment)
    cl_trainer.save_trainset(examples, args.out)
    print(f"wrote {len(examples)} examples to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    corpus = _load(args)
    provider = _provider(args)
    examples = cl_trainer.load_trainset(args.trainset)
    config = cl_trainer.TrainConfig(temperature=args.tau, learning_rate=args.lr,
                                    epochs=args.epochs, batch_size=args.batch_size,
                                    seed=args.seed)
    result = cl_trainer.train(examples, corpus, provider, config)
    save_adapter(result.adapter, args.out)
    if args.loss_csv:
        with open(args.loss_csv, "w", encoding="utf-8") as fh:
            fh.write("epoch,mean_loss\n")
            for epoch, value in enumerate(result.epoch_losses, start=1):
                fh.write(f"{epoch},{value!r}\n")
    print(f"trained {args.epochs} epochs; "
          f"loss {result.epoch_losses[0]:.6f} -> {result.epoch_losses[-1]:.6f}")
    return EXIT_OK


def _load_adapter_or_identity(args, provider):
    path = args.adapter or os.environ.get("QBR_ADAPTER")
    if path:
        return load_adapter(path, provider.fingerprint)
    return identity_adapter(provider.dim, provider.fingerprint)


def _cmd_search(args) -> int:
    if args.k < 1:
        raise _UsageError("--k must be >= 1")
    corpus = _load(args)
    provider = _provider(args)
    index_path = args.index or os.environ.get("QBR_INDEX")
    index = load_index(index_path, provider.fingerprint)
    adapter = _load_adapter_or_identity(args, provider)
    warnings: list[str] = []
    results = run_search(corpus, index, provider, adapter, args.query, args.k, warnings)
    if args.json:
        print(json.dumps([r.to_dict() for r in results], ensure_ascii=False))
    else:
        for r in results:
            excerpt = r.scope_text if len(r.scope_text) <= 120 else r.scope_text[:117] + "..."
            print(f"#{r.rank} [{r.doc_score:.4f}/{r.scope_score:.4f}] {r.question}")
            print(f"    {r.doc_title} ({r.doc_id}, scope {r.scope_id})")
            print(f"    {excerpt}")
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _cmd_eval(args, do_compare: bool) -> int:
    corpus = _load(args)
    provider = _provider(args)
    index = load_index(args.index, provider.fingerprint)
    adapter = _load_adapter_or_identity(args, provider)
    testset = load_testset(args.testset)
    if do_compare:
        reports = evaluation.compare(corpus, index, provider, adapter, testset,
                                     cutoff=args.cutoff)
        print(evaluation.format_comparison(reports))
        payload = {name: r.to_dict() for name, r in reports.items()}
    else:
        report = evaluation.evaluate(corpus, index, provider, adapter, testset,
                                     cutoff=args.cutoff)
        print(evaluation.format_comparison({"qbr": report}))
        payload = report.to_dict()
    if args.out:
        # wall-clock latency would make otherwise identical runs produce
        # different report files, so it stays in the printed summary only
        if do_compare:
            for section in payload.values():
                section.pop("mean_latency_ms", None)
        else:
            payload.pop("mean_latency_ms", None)
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app, load_snapshot

    listen = args.listen or os.environ.get("QBR_LISTEN") or "127.0.0.1:8080"
    host, _, port = listen.rpartition(":")
    k = args.k if args.k is not None else int(os.environ.get("QBR_K", "5"))
    config = ServiceConfig(doc_path=args.docs, scope_path=args.scopes,
                           qb_path=args.qb,
                           index_path=args.index or os.environ.get("QBR_INDEX"),
                           adapter_path=args.adapter or os.environ.get("QBR_ADAPTER"),
                           listen_host=host or "127.0.0.1", listen_port=int(port),
                           default_k=k, dim=args.dim,
                           cors_allowed_origins=args.cors_origin)
    config.validate()
    provider = load_precomputed(args.precomputed) if args.precomputed else None
    snapshot = load_snapshot(config, provider)
    app = create_app(snapshot, default_k=config.default_k,
                     cors_allowed_origins=config.cors_allowed_origins)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port)
    return EXIT_OK


def _cmd_gen_synthetic(args) -> int:
    if args.docs < 1 or args.scopes_per_doc < 1 or args.questions_per_scope < 1:
        raise _UsageError("--docs, --scopes-per-doc, --questions-per-scope must be >= 1")
    if not 0.0 <= args.overlap < 1.0:
        raise _UsageError("--overlap must be in [0, 1)")
    corpus, testset = synth.gen_synthetic(args.docs, args.scopes_per_doc,
                                          args.questions_per_scope,
                                          args.overlap, args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {name: os.path.join(args.out_dir, f"{name}.jsonl")
             for name in ("documents", "scopes", "qb", "testset")}
    save_corpus(corpus, paths["documents"], paths["scopes"], paths["qb"])
    save_testset(testset, paths["testset"])
    print(f"wrote {len(corpus.documents)} docs / {len(corpus.scopes)} scopes / "
          f"{len(corpus.qb)} entries / {len(testset)} test cases to {args.out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "ingest":
            return _cmd_ingest(args)
        if args.command == "build-index":
            return _cmd_build_index(args)
        if args.command == "make-trainset":
            return _cmd_make_trainset(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "search":
            return _cmd_search(args)
        if args.command == "eval":
            return _cmd_eval(args, do_compare=False)
        if args.command == "compare":
            return _cmd_eval(args, do_compare=True)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "gen-synthetic":
            return _cmd_gen_synthetic(args)
        raise AssertionError(f"unhandled command {args.command}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QBRError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line orchestration.

Subcommands: build-vocab, vectorize, cluster, sweep, classify, evaluate.
Values come from an INI config file (--config) and/or flags; a flag always
wins. Reports are JSON with the fully resolved configuration inline, written
atomically (temp file, then rename). Exit codes: 0 success, 1 validation
error, 2 missing resource, 3 internal invariant violation.

The FSD_STREAM_THREADS environment variable caps how many worker threads the
clusterer may use for the nearest-neighbor searches of one mini-batch.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .classify import TriangularKernelSVC
from .cluster import (
    FsdParams,
    ThreadAssignment,
    fsd_cluster,
    sweep_threshold,
    window_for_one_day,
)
from .config import VECTOR_SOURCES, RunConfig, load_config, _parse_floats, _parse_ints
from .corpus import Corpus, load_corpus, split_train_test
from .embeddings import (
    average_embedding,
    load_tweet_vectors,
    load_word_vectors,
    save_tweet_vectors,
)
from .errors import FsdError, InternalError, MissingResourceError, ValidationError
from .evaluate import best_matching_f1, macro_f1
from .preprocess import load_stopwords, tokenize
from .vectorize import Vocabulary, build_vocabulary, vectorize_idf


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _load_cfg_corpus(cfg: RunConfig) -> Corpus:
    return load_corpus(
        cfg.require_corpus(),
        format=cfg.corpus_format,
        name=cfg.corpus_name,
    )


def _token_lists(cfg: RunConfig, corpus: Corpus) -> list[list[str]]:
    return [tokenize(t.text, cfg.tokenizer) for t in corpus]


def _vocabulary_for(cfg: RunConfig, corpus: Corpus, mode: str) -> Vocabulary:
    """Vocabulary per counting mode: df over the annotated subset (dataset)
    or over every tweet in the corpus file (all_tweets)."""
    if cfg.vocabulary_path is not None:
        return Vocabulary.from_json(cfg.vocabulary_path)
    scope = corpus.annotated() if mode == "dataset" else corpus
    if len(scope) == 0:
        raise ValidationError("corpus has no annotated tweets to count over")
    return build_vocabulary(
        _token_lists(cfg, scope),
        stopwords=load_stopwords(cfg.stopwords),
        df_min=cfg.df_min,
        mode=mode,
    )


def _doc_vectors(cfg: RunConfig, corpus: Corpus, target: Corpus | None = None):
    """Vectors for ``target`` (default: the whole corpus), plus a source tag.

    Vocabularies and idf weights always come from ``corpus`` according to the
    counting mode, even when only a subset is being vectorized.
    """
    target = target if target is not None else corpus
    source = cfg.vector_source
    if source == "idf-dataset":
        vocab = _vocabulary_for(cfg, corpus, "dataset")
        return [vectorize_idf(toks, vocab) for toks in _token_lists(cfg, target)]
    if source == "idf-all-tweets":
        vocab = _vocabulary_for(cfg, corpus, "all_tweets")
        return [vectorize_idf(toks, vocab) for toks in _token_lists(cfg, target)]
    if source in ("w2v-mean", "w2v-idf-mean"):
        table = load_word_vectors(cfg.word_vectors_path)
        if source == "w2v-idf-mean":
            vocab = _vocabulary_for(cfg, corpus, "all_tweets")
            rows = [
                average_embedding(toks, table, weights="idf", vocab=vocab)
                for toks in _token_lists(cfg, target)
            ]
        else:
            rows = [
                average_embedding(toks, table, weights="uniform")
                for toks in _token_lists(cfg, target)
            ]
        return rows
    if source == "external":
        table = load_tweet_vectors(cfg.tweet_vectors_path)
        return [table.get(t.id) for t in target]
    raise ValidationError(f"unknown vector source {source!r}")


def _resolve_window(cfg: RunConfig, corpus: Corpus) -> int:
    return cfg.window if cfg.window > 0 else window_for_one_day(corpus)


def cmd_build_vocab(cfg: RunConfig, mode: str) -> int:
    corpus = _load_cfg_corpus(cfg)
    scope = corpus.annotated() if mode == "dataset" else corpus
    if len(scope) == 0:
        raise ValidationError("no documents to count (is the corpus annotated?)")
    vocab = build_vocabulary(
        _token_lists(cfg, scope),
        stopwords=load_stopwords(cfg.stopwords),
        df_min=cfg.df_min,
        mode=mode,
    )
    out = cfg.out_dir / "vocabulary.json"
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    vocab.to_json(tmp)
    os.replace(tmp, out)
    print(f"vocabulary: {len(vocab)} terms (mode={mode}, df_min={cfg.df_min}, "
          f"n_docs={vocab.n_docs}) -> {out}")
    return 0


def cmd_vectorize(cfg: RunConfig, vector_format: str) -> int:
    if cfg.vector_source.startswith("idf-"):
        raise ValidationError(
            "idf vectors are sparse and have no tweet-vector file format; "
            "they are built inline by cluster/sweep/classify"
        )
    corpus = _load_cfg_corpus(cfg)
    rows = _doc_vectors(cfg, corpus)
    mapping = {t.id: v for t, v in zip(corpus, rows)}
    suffix = "tsv" if vector_format == "tsv" else "twvec"
    out = cfg.out_dir / f"vectors.{suffix}"
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    save_tweet_vectors(mapping, tmp, format=vector_format)
    os.replace(tmp, out)
    print(f"wrote {len(mapping)} vectors (dim {len(rows[0])}) -> {out}")
    return 0


def cmd_cluster(cfg: RunConfig) -> int:
    corpus = _load_cfg_corpus(cfg)
    vectors = _doc_vectors(cfg, corpus)
    window = _resolve_window(cfg, corpus)
    params = FsdParams(threshold=cfg.threshold, window=window, batch_size=cfg.batch_size)
    started = time.perf_counter()
    assignment = fsd_cluster(corpus, vectors, params)
    runtime = time.perf_counter() - started

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_tsv = cfg.out_dir / "assignment.tsv"
    tmp = out_tsv.with_name(out_tsv.name + ".tmp")
    assignment.to_tsv(tmp)
    os.replace(tmp, out_tsv)
    sidecar = {
        "threshold": cfg.threshold,
        "window": window,
        "batch_size": cfg.batch_size,
        "vector_source": cfg.vector_source,
        "n_docs": len(corpus),
        "n_threads": assignment.n_threads,
        "runtime_seconds": round(runtime, 3),
        "config": cfg.resolved(),
    }
    _write_json(cfg.out_dir / "cluster_run.json", sidecar)
    print(f"{len(corpus)} docs -> {assignment.n_threads} threads "
          f"(t={cfg.threshold}, w={window}, batch={cfg.batch_size}) in {runtime:.2f}s")

    gold = corpus.gold_labels()
    if gold:
        report = best_matching_f1(assignment, gold)
        payload = {
            "score": report.score,
            "n_events": report.n_events,
            "n_clusters": report.n_clusters,
            "per_event": [
                {"event_id": m.event_id, "cluster_id": m.cluster_id,
                 "precision": m.precision, "recall": m.recall, "f1": m.f1}
                for m in report.per_event
            ],
            "config": cfg.resolved(),
        }
        _write_json(cfg.out_dir / "eval.json", payload)
        print(report.to_table())
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    corpus = _load_cfg_corpus(cfg)
    gold = corpus.gold_labels()
    if not gold:
        raise ValidationError("threshold sweep needs gold event labels")
    vectors = _doc_vectors(cfg, corpus)
    window = _resolve_window(cfg, corpus)
    result = sweep_threshold(
        corpus, vectors, window, cfg.sweep_grid, gold, batch_size=cfg.batch_size
    )
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["threshold\tf1\tn_threads"]
    for row in result.rows:
        lines.append(f"{row.threshold}\t{row.f1:.6f}\t{row.n_threads}")
    _atomic_write_text(cfg.out_dir / "sweep.tsv", "\n".join(lines) + "\n")
    payload = {
        "rows": [
            {"threshold": r.threshold, "f1": r.f1, "n_threads": r.n_threads}
            for r in result.rows
        ],
        "best_threshold": result.best_threshold,
        "best_f1": result.best_f1,
        "window": window,
        "config": cfg.resolved(),
    }
    _write_json(cfg.out_dir / "sweep.json", payload)
    print("\n".join(lines))
    print(f"best: t={result.best_threshold} (F1={result.best_f1:.4f})")
    return 0


def cmd_classify(cfg: RunConfig) -> int:
    corpus = _load_cfg_corpus(cfg)
    annotated = corpus.annotated()
    if len(annotated) == 0:
        raise ValidationError("classification needs gold event labels")
    vectors = _doc_vectors(cfg, corpus, target=annotated)
    by_id = {t.id: v for t, v in zip(annotated, vectors)}
    scores = []
    for seed in cfg.seeds:
        train, test = split_train_test(annotated, cfg.split_fraction, seed)
        svc = TriangularKernelSVC(C=cfg.svm_c, seed=seed)
        svc.fit([by_id[t.id] for t in train], [t.event_id for t in train])
        predictions = svc.predict([by_id[t.id] for t in test])
        predicted = {t.id: label for t, label in zip(test, predictions)}
        gold = {t.id: t.event_id for t in test}
        scores.append(macro_f1(predicted, gold))
    mean = statistics.fmean(scores)
    std = float(np.std(scores))
    payload = {
        "macro_f1_mean": mean,
        "macro_f1_std": std,
        "per_seed": [{"seed": s, "macro_f1": f} for s, f in zip(cfg.seeds, scores)],
        "config": cfg.resolved(),
    }
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(cfg.out_dir / "classification.json", payload)
    print(f"macro-F1 over {len(cfg.seeds)} seed(s): "
          f"{100 * mean:.2f} +/- {100 * std:.2f} (percent)")
    return 0


def cmd_evaluate(cfg: RunConfig, assignment_path: Path) -> int:
    if not assignment_path.exists():
        raise MissingResourceError(f"assignment file not found: {assignment_path}")
    corpus = _load_cfg_corpus(cfg)
    gold = corpus.gold_labels()
    if not gold:
        raise ValidationError("evaluation needs gold event labels")
    assignment = ThreadAssignment.from_tsv(assignment_path)
    report = best_matching_f1(assignment, gold)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "score": report.score,
        "n_events": report.n_events,
        "n_clusters": report.n_clusters,
        "per_event": [
            {"event_id": m.event_id, "cluster_id": m.cluster_id,
             "precision": m.precision, "recall": m.recall, "f1": m.f1}
            for m in report.per_event
        ],
        "config": cfg.resolved(),
    }
    _write_json(cfg.out_dir / "eval.json", payload)
    print(report.to_table())
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsdstream",
        description="Streaming first-story detection over tweet corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="INI config file")
        p.add_argument("--corpus", type=Path, help="corpus file (jsonl or tsv)")
        p.add_argument("--format", choices=("jsonl", "tsv"), help="corpus format")
        p.add_argument("--name", help="corpus name recorded in reports")
        p.add_argument("--vectors", choices=VECTOR_SOURCES, help="vector source")
        p.add_argument("--threshold", type=float, help="distance threshold in [0, 2]")
        p.add_argument("--window", type=int, help="window size (0 = about one day)")
        p.add_argument("--batch-size", type=int, help="mini-batch size (default 8)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--stopwords", help="bundled list name, file path, or 'none'")
        p.add_argument("--df-min", type=int, help="minimum document frequency")
        p.add_argument("--word-vectors", type=Path, help="word2vec text file")
        p.add_argument("--tweet-vectors", type=Path, help="per-tweet vector file")
        p.add_argument("--vocab", type=Path, help="prebuilt vocabulary.json")

    p = sub.add_parser("build-vocab", help="build and save an idf vocabulary")
    common(p)
    p.add_argument("--mode", choices=("dataset", "all_tweets"), default="all_tweets",
                   help="count df over the annotated subset or the full corpus")

    p = sub.add_parser("vectorize", help="write per-tweet dense vectors to a file")
    common(p)
    p.add_argument("--vector-format", choices=("tsv", "binary"), default="tsv")

    p = sub.add_parser("cluster", help="run first-story detection over a corpus")
    common(p)

    p = sub.add_parser("sweep", help="sweep the distance threshold against gold labels")
    common(p)
    p.add_argument("--grid", help="comma/space separated thresholds")

    p = sub.add_parser("classify", help="one-vs-rest SVM separability check")
    common(p)
    p.add_argument("--c", type=float, help="SVM regularization C")
    p.add_argument("--seeds", help="comma/space separated seeds")
    p.add_argument("--split-fraction", type=float, help="train fraction in (0, 1)")

    p = sub.add_parser("evaluate", help="score a saved assignment against gold labels")
    common(p)
    p.add_argument("--assignment", type=Path, required=True, help="assignment.tsv path")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.corpus is not None:
        cfg.corpus_path = args.corpus
    if args.format is not None:
        cfg.corpus_format = args.format
    if args.name is not None:
        cfg.corpus_name = args.name
    if args.vectors is not None:
        cfg.vector_source = args.vectors
    if args.threshold is not None:
        cfg.threshold = args.threshold
    if args.window is not None:
        cfg.window = args.window
    if args.batch_size is not None:
        cfg.batch_size = args.batch_size
    if args.out is not None:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.stopwords is not None:
        cfg.stopwords = args.stopwords
    if args.df_min is not None:
        cfg.df_min = args.df_min
    if args.word_vectors is not None:
        cfg.word_vectors_path = args.word_vectors
    if args.tweet_vectors is not None:
        cfg.tweet_vectors_path = args.tweet_vectors
    if args.vocab is not None:
        cfg.vocabulary_path = args.vocab
    if getattr(args, "grid", None):
        cfg.sweep_grid = _parse_floats(args.grid)
    if getattr(args, "c", None) is not None:
        cfg.svm_c = args.c
    if getattr(args, "seeds", None):
        cfg.seeds = _parse_ints(args.seeds)
    if getattr(args, "split_fraction", None) is not None:
        cfg.split_fraction = args.split_fraction
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.command == "build-vocab":
            code = cmd_build_vocab(cfg, args.mode)
        elif args.command == "vectorize":
            code = cmd_vectorize(cfg, args.vector_format)
        elif args.command == "cluster":
            code = cmd_cluster(cfg)
        elif args.command == "sweep":
            code = cmd_sweep(cfg)
        elif args.command == "classify":
            code = cmd_classify(cfg)
        elif args.command == "evaluate":
            code = cmd_evaluate(cfg, args.assignment)
        else:  # pragma: no cover - argparse enforces the choices
            raise InternalError(f"unknown command {args.command!r}")
    except FsdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except AssertionError as exc:  # violated internal invariant
        print(f"internal error: {exc}", file=sys.stderr)
        return InternalError.exit_code
    return code


if __name__ == "__main__":
    sys.exit(main())

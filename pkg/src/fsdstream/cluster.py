"""Mini-batch first-story detection.

Documents stream in chronological order. Each one is compared to its nearest
neighbor among the ``window`` most recent documents: below the distance
threshold it joins the neighbor's thread, otherwise it opens a new thread.
Batches of ``batch_size`` documents are all searched against the window state
as of the batch start — intra-batch documents never see each other, which is
what lets the searches run in parallel — and the window mutates only at batch
boundaries. ``batch_size=1`` is the strictly sequential algorithm.

The threshold compares cosine *distance* (1 - similarity): merging happens
when the neighbor is close. Empty vectors sit at distance 2 from everything,
so they always open singleton threads yet still occupy window slots.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import Corpus
from .embeddings import TweetVectorFile
from .errors import InternalError, ValidationError
from .evaluate import EvalReport, best_matching_f1
from .window import DocVector, WindowBuffer, cosine_distance, nearest_neighbor

THREADS_ENV_VAR = "FSD_STREAM_THREADS"


@dataclass(frozen=True)
class FsdParams:
    """Streaming parameters: distance threshold, window capacity, batch size."""

    threshold: float
    window: int
    batch_size: int = 8

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 2.0:
            raise ValidationError(f"threshold must be in [0, 2], got {self.threshold}")
        if self.window < 1:
            raise ValidationError(f"window must be >= 1, got {self.window}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class ThreadAssignment:
    """Per-document thread ids, aligned with stream order.

    Thread ids are dense and creation-ordered (0, 1, 2, ...); the first
    document of each thread precedes every other member in stream order.
    """

    doc_ids: list[str]
    thread_ids: list[int]
    first_docs: list[str]

    def __post_init__(self) -> None:
        if len(self.doc_ids) != len(self.thread_ids):
            raise InternalError("doc_ids and thread_ids length mismatch")
        seen: set[int] = set()
        for doc, tid in zip(self.doc_ids, self.thread_ids):
            if tid not in seen:
                if tid != len(seen):
                    raise InternalError("thread ids are not dense in creation order")
                if self.first_docs[tid] != doc:
                    raise InternalError(f"thread {tid} first document mismatch")
                seen.add(tid)

    def __len__(self) -> int:
        return len(self.doc_ids)

    @property
    def n_threads(self) -> int:
        return len(self.first_docs)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.doc_ids, self.thread_ids))

    def groups(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for doc, tid in zip(self.doc_ids, self.thread_ids):
            out.setdefault(tid, []).append(doc)
        return out

    def to_tsv(self, path: str | Path) -> None:
        first = set(self.first_docs)
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write("doc_id\tthread_id\tthread_first\n")
            for doc, tid in zip(self.doc_ids, self.thread_ids):
                fh.write(f"{doc}\t{tid}\t{1 if doc in first else 0}\n")

    @classmethod
    def from_tsv(cls, path: str | Path) -> "ThreadAssignment":
        doc_ids: list[str] = []
        thread_ids: list[int] = []
        firsts: dict[int, str] = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header != ["doc_id", "thread_id", "thread_first"]:
                raise ValidationError(f"{path}:1: unexpected assignment header {header}")
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                cells = line.rstrip("\n").split("\t")
                if len(cells) != 3:
                    raise ValidationError(f"{path}:{lineno}: expected 3 columns")
                doc, tid_s, first_s = cells
                tid = int(tid_s)
                doc_ids.append(doc)
                thread_ids.append(tid)
                if first_s == "1":
                    firsts[tid] = doc
        first_docs = [firsts[t] for t in range(len(firsts))]
        return cls(doc_ids, thread_ids, first_docs)


def _stream_workers() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise ValidationError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None


class FirstStoryDetector(BaseEstimator):
    """Sklearn-style streaming clusterer over chronologically ordered vectors.

    ``fit_predict(X)`` consumes the vectors in order and returns one thread
    label per document. ``n_jobs=None`` reads the FSD_STREAM_THREADS
    environment variable; values above 1 run the nearest-neighbor searches of
    each batch in a thread pool (the window is quiescent during a batch, so
    results are identical either way).
    """

    def __init__(
        self,
        threshold: float = 0.75,
        window: int = 1000,
        batch_size: int = 8,
        n_jobs: int | None = None,
    ):
        self.threshold = threshold
        self.window = window
        self.batch_size = batch_size
        self.n_jobs = n_jobs

    def _vectors_as_list(self, X) -> list[DocVector]:
        if isinstance(X, np.ndarray):
            if X.ndim != 2:
                raise ValidationError("dense input must be a 2-d array of row vectors")
            return list(X)
        return list(X)

    def fit_predict(self, X, y=None) -> np.ndarray:
        params = FsdParams(self.threshold, self.window, self.batch_size)
        docs = self._vectors_as_list(X)
        workers = self.n_jobs if self.n_jobs is not None else _stream_workers()

        buffer = WindowBuffer(params.window)
        labels = np.empty(len(docs), dtype=np.int64)
        first_doc_indices: list[int] = []
        pool = ThreadPoolExecutor(workers) if workers > 1 and params.batch_size > 1 else None
        try:
            for start in range(0, len(docs), params.batch_size):
                batch = docs[start : start + params.batch_size]
                if pool is not None:
                    neighbors = list(pool.map(buffer.nearest_neighbor, batch))
                else:
                    neighbors = [buffer.nearest_neighbor(v) for v in batch]
                decided: list[tuple[int, DocVector, int]] = []
                for offset, (vec, nn) in enumerate(zip(batch, neighbors)):
                    i = start + offset
                    if nn is not None and nn[1] < params.threshold:
                        tid = nn[0].thread_id
                    else:
                        tid = len(first_doc_indices)
                        first_doc_indices.append(i)
                    labels[i] = tid
                    decided.append((i, vec, tid))
                for i, vec, tid in decided:
                    buffer.append(str(i), vec, tid)
                if len(buffer) > params.window:
                    raise InternalError("window exceeded its capacity")
        finally:
            if pool is not None:
                pool.shutdown()

        self.labels_ = labels
        self.first_doc_indices_ = first_doc_indices
        self.n_threads_ = len(first_doc_indices)
        return labels

    def fit(self, X, y=None) -> "FirstStoryDetector":
        self.fit_predict(X)
        return self


def _aligned_vectors(corpus: Corpus, vectors) -> list[DocVector]:
    if isinstance(vectors, TweetVectorFile):
        return [vectors.get(t.id) for t in corpus]
    if isinstance(vectors, Mapping):
        out = []
        for t in corpus:
            if t.id not in vectors:
                raise ValidationError(f"no vector for document {t.id!r}")
            out.append(vectors[t.id])
        return out
    docs = list(vectors)
    if len(docs) != len(corpus):
        raise ValidationError(
            f"vector sequence length {len(docs)} != corpus size {len(corpus)}"
        )
    return docs


def fsd_cluster(corpus: Corpus, vectors, params: FsdParams) -> ThreadAssignment:
    """Cluster a corpus into threads; ``vectors`` maps every doc id to its
    DocVector (a TweetVectorFile, a mapping, or a corpus-aligned sequence)."""
    docs = _aligned_vectors(corpus, vectors)
    detector = FirstStoryDetector(
        threshold=params.threshold, window=params.window, batch_size=params.batch_size
    )
    labels = detector.fit_predict(docs)
    ids = corpus.ids()
    return ThreadAssignment(
        doc_ids=ids,
        thread_ids=[int(t) for t in labels],
        first_docs=[ids[i] for i in detector.first_doc_indices_],
    )


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    f1: float
    n_threads: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    best_threshold: float
    best_f1: float


def sweep_threshold(
    corpus: Corpus,
    vectors,
    window: int,
    t_values: Sequence[float],
    gold: Mapping[str, str],
    batch_size: int = 8,
) -> SweepResult:
    """Run the clusterer once per threshold and score each run against gold.

    Rows come back ordered by ascending threshold; the best threshold is the
    smallest one attaining the maximum best-matching F1.
    """
    if not t_values:
        raise ValidationError("threshold sweep needs at least one value")
    for t in t_values:
        if not 0.0 <= t <= 2.0:
            raise ValidationError(f"sweep threshold {t} outside [0, 2]")
    docs = _aligned_vectors(corpus, vectors)
    rows = []
    for t in sorted(t_values):
        assignment = fsd_cluster(
            corpus, docs, FsdParams(threshold=t, window=window, batch_size=batch_size)
        )
        report: EvalReport = best_matching_f1(assignment.as_dict(), gold)
        rows.append(SweepRow(threshold=t, f1=report.score, n_threads=assignment.n_threads))
    best = max(rows, key=lambda r: (r.f1, -r.threshold))
    return SweepResult(rows=rows, best_threshold=best.threshold, best_f1=best.f1)


def window_for_one_day(corpus: Corpus) -> int:
    """Default window capacity: mean number of documents per day, so the
    window holds roughly one day of history."""
    span = corpus.span_seconds()
    if span <= 0:
        raise ValidationError("corpus spans no time; pass the window size explicitly")
    days = span / 86400.0
    return max(1, round(len(corpus) / days))

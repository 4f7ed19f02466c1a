"""Shared generators for random vectors and synthetic corpora."""

from __future__ import annotations

import numpy as np

from fsdstream import Corpus, SparseVector, Tweet


def random_sparse_unit(rng: np.random.Generator, vocab_size: int = 30, nnz: int = 4) -> SparseVector:
    k = int(rng.integers(1, nnz + 1))
    k = min(k, vocab_size)
    idx = rng.choice(vocab_size, size=k, replace=False)
    w = rng.uniform(0.1, 1.0, size=k)
    return SparseVector.from_weights({int(i): float(x) for i, x in zip(idx, w)})


def random_dense_unit(rng: np.random.Generator, dim: int = 8) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_stream(
    rng: np.random.Generator,
    n: int,
    kind: str = "sparse",
    vocab_size: int = 30,
    dim: int = 8,
    empty_rate: float = 0.0,
) -> list:
    out = []
    for _ in range(n):
        if empty_rate and rng.random() < empty_rate:
            out.append(SparseVector((), 0.0) if kind == "sparse" else np.zeros(dim))
        elif kind == "sparse":
            out.append(random_sparse_unit(rng, vocab_size))
        else:
            out.append(random_dense_unit(rng, dim))
    return out


def separable_corpus(
    n_events: int = 5,
    per_event: int = 100,
    start_ts: int = 1_500_000_000,
    step: int = 60,
) -> Corpus:
    """Vocabulary-disjoint events with interleaved timestamps.

    Every tweet of an event shares three anchor terms with all its siblings
    plus a rotating pair, so same-event cosine distances stay well below 0.9
    while cross-event distances are exactly 1. Every term reaches df >= 10
    when per_event >= 35 or so.
    """
    tweets = []
    for i in range(n_events * per_event):
        e = i % n_events
        j = i // n_events
        words = [f"e{e}w{k}" for k in range(3)]
        words.append(f"e{e}w{3 + j % 7}")
        words.append(f"e{e}w{3 + (j + 1) % 7}")
        tweets.append(
            Tweet(
                id=f"t{i:05d}",
                timestamp=start_ts + i * step,
                text=" ".join(words),
                event_id=f"ev{e}",
            )
        )
    return Corpus.from_tweets(tweets, name="separable")

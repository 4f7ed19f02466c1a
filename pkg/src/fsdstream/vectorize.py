"""Idf vocabularies and sparse idf document vectors.

Short texts rarely repeat a term, so term weighting is pure idf: each
distinct in-vocabulary token contributes ``1 + ln((n_docs + 1) / (df + 1))``
exactly once (binary presence, no term-frequency factor). Vectors are
L2-normalized at construction so cosine similarity reduces to a dot product.

Document frequencies can be counted over the annotated subset only
(``dataset`` mode) or over the full corpus (``all_tweets`` mode); the mode is
recorded on the vocabulary artifact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError

VOCAB_MODES = ("dataset", "all_tweets")


@dataclass(frozen=True)
class SparseVector:
    """Sparse vector as (index, weight) pairs sorted by strictly increasing index.

    ``norm`` is the Euclidean norm of the stored weights: 1.0 for vectors
    produced by the factories here, 0.0 for the empty vector. An empty
    vector marks a document whose tokens were all out of vocabulary.
    """

    pairs: tuple[tuple[int, float], ...]
    norm: float

    @classmethod
    def from_weights(cls, weights: Mapping[int, float]) -> "SparseVector":
        """Build an L2-normalized vector from an index -> weight mapping."""
        items = sorted(weights.items())
        if any(w <= 0 for _, w in items):
            raise ValidationError("sparse vector weights must be > 0")
        if not items:
            return EMPTY_SPARSE
        norm = math.sqrt(math.fsum(w * w for _, w in items))
        return cls(tuple((i, w / norm) for i, w in items), 1.0)

    @property
    def is_empty(self) -> bool:
        return not self.pairs

    def to_dict(self) -> dict[int, float]:
        return dict(self.pairs)


EMPTY_SPARSE = SparseVector((), 0.0)


def sparse_dot(a: SparseVector, b: SparseVector) -> float:
    """Dot product via a merge walk over both sorted pair lists.

    Contributions are summed in increasing index order; the inverted-index
    search accumulates in the same order, so both paths produce bit-identical
    similarities.
    """
    pa, pb = a.pairs, b.pairs
    i = j = 0
    total = 0.0
    while i < len(pa) and j < len(pb):
        ia, wa = pa[i]
        ib, wb = pb[j]
        if ia == ib:
            total += wa * wb
            i += 1
            j += 1
        elif ia < ib:
            i += 1
        else:
            j += 1
    return total


def idf_weight(df: int, n_docs: int) -> float:
    """Smoothed inverse document frequency: 1 + ln((n_docs + 1) / (df + 1)).

    Strictly decreasing in df and always >= 1 (df <= n_docs). A term absent
    from the corpus (df = 0) must never be weighted.
    """
    if df == 0:
        raise ValidationError("df = 0: a term absent from the corpus has no idf weight")
    if df < 0 or n_docs < 1 or df > n_docs:
        raise ValidationError(f"idf_weight requires 1 <= df <= n_docs, got df={df}, n_docs={n_docs}")
    return 1.0 + math.log((n_docs + 1) / (df + 1))


@dataclass
class Vocabulary:
    """Term -> (index, document frequency) table with pruning metadata.

    Indices form a bijection onto 0..len-1 (terms in sorted order, so
    rebuilding from the same documents is byte-identical). Immutable after
    construction by convention; safe for concurrent reads.
    """

    entries: dict[str, tuple[int, int]]
    n_docs: int
    mode: str = "dataset"
    df_min: int = 1
    stopwords: frozenset[str] = frozenset()
    _weights: dict[str, tuple[int, float]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.mode not in VOCAB_MODES:
            raise ValidationError(f"vocabulary mode must be one of {VOCAB_MODES}")
        indices = sorted(idx for idx, _ in self.entries.values())
        if indices != list(range(len(self.entries))):
            raise ValidationError("vocabulary indices must be a bijection onto 0..len-1")
        for term, (_, df) in self.entries.items():
            if not self.df_min <= df <= self.n_docs:
                raise ValidationError(
                    f"term {term!r}: df={df} outside [df_min={self.df_min}, n_docs={self.n_docs}]"
                )
            if term in self.stopwords:
                raise ValidationError(f"term {term!r} is a stopword and must not be stored")
        self._weights = {
            term: (idx, idf_weight(df, self.n_docs))
            for term, (idx, df) in self.entries.items()
        }

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def index(self, term: str) -> int:
        return self.entries[term][0]

    def df(self, term: str) -> int:
        return self.entries[term][1]

    def idf(self, term: str) -> float:
        return self._weights[term][1]

    def to_json(self, path: str | Path) -> None:
        payload = {
            "mode": self.mode,
            "df_min": self.df_min,
            "n_docs": self.n_docs,
            "stopwords": sorted(self.stopwords),
            "entries": {t: [i, d] for t, (i, d) in self.entries.items()},
        }
        Path(path).write_text(
            json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=1) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "Vocabulary":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            entries={t: (int(i), int(d)) for t, (i, d) in payload["entries"].items()},
            n_docs=int(payload["n_docs"]),
            mode=payload["mode"],
            df_min=int(payload["df_min"]),
            stopwords=frozenset(payload["stopwords"]),
        )


def build_vocabulary(
    docs: Sequence[Iterable[str]],
    stopwords: frozenset[str] = frozenset(),
    df_min: int = 1,
    mode: str = "dataset",
) -> Vocabulary:
    """Count document frequencies and keep terms with df >= df_min.

    df(term) is the number of documents containing the term at least once.
    Stopwords are excluded before pruning; indices are assigned in sorted
    term order, so two builds over the same documents agree exactly.
    """
    if df_min < 1:
        raise ValidationError(f"df_min must be >= 1, got {df_min}")
    if not docs:
        raise ValidationError("cannot build a vocabulary from zero documents")
    counts: dict[str, int] = {}
    for doc in docs:
        for term in set(doc):
            counts[term] = counts.get(term, 0) + 1
    kept = sorted(
        term
        for term, df in counts.items()
        if df >= df_min and term not in stopwords
    )
    entries = {term: (idx, counts[term]) for idx, term in enumerate(kept)}
    return Vocabulary(
        entries=entries,
        n_docs=len(docs),
        mode=mode,
        df_min=df_min,
        stopwords=stopwords,
    )


def vectorize_idf(tokens: Iterable[str], vocab: Vocabulary) -> SparseVector:
    """Binary-presence idf vector: each distinct in-vocabulary token weighs
    idf(term) once, repetitions and order ignored; L2-normalized.

    All tokens out of vocabulary yields the empty vector (norm 0).
    """
    weights = vocab._weights
    seen: dict[int, float] = {}
    for term in tokens:
        hit = weights.get(term)
        if hit is not None:
            seen[hit[0]] = hit[1]
    if not seen:
        return EMPTY_SPARSE
    norm = math.sqrt(math.fsum(w * w for w in seen.values()))
    return SparseVector(tuple((i, w / norm) for i, w in sorted(seen.items())), 1.0)


class IdfVectorizer(BaseEstimator, TransformerMixin):
    """Sklearn-style wrapper: ``fit`` builds the vocabulary from token lists,
    ``transform`` maps token lists to sparse idf vectors.

    Parameters follow the experimental defaults: ``df_min=10`` and counting
    mode ``dataset``; pass ``mode="all_tweets"`` when fitting on a full
    corpus rather than its annotated subset.
    """

    def __init__(
        self,
        df_min: int = 10,
        stopwords: frozenset[str] = frozenset(),
        mode: str = "dataset",
    ):
        self.df_min = df_min
        self.stopwords = stopwords
        self.mode = mode

    def fit(self, X: Sequence[Iterable[str]], y=None) -> "IdfVectorizer":
        self.vocabulary_ = build_vocabulary(
            X, stopwords=frozenset(self.stopwords), df_min=self.df_min, mode=self.mode
        )
        return self

    def transform(self, X: Sequence[Iterable[str]]) -> list[SparseVector]:
        if not hasattr(self, "vocabulary_"):
            raise ValidationError("IdfVectorizer is not fitted; call fit first")
        return [vectorize_idf(tokens, self.vocabulary_) for tokens in X]

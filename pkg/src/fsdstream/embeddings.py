"""Dense tweet representations.

Two sources: word-vector tables in word2vec text format, averaged per tweet
(uniform or idf-weighted); and precomputed per-tweet embedding files produced
by external sentence encoders. Per-tweet vectors come as TSV (id followed by
float components) or as a compact binary layout, and are re-normalized to
unit L2 on load so cosine distance is a plain dot product downstream.

Binary layout (little-endian throughout): a 16-byte header — the 6 magic
bytes ``TWVEC1``, two NUL pad bytes, u32 record count, u32 dimension —
followed by one record per tweet: u16 id byte-length, the UTF-8 id, then
``dim`` float32 components.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import MissingResourceError, ValidationError
from .vectorize import Vocabulary

TWVEC_MAGIC = b"TWVEC1\x00\x00"


def normalize_dense(v: np.ndarray) -> np.ndarray:
    """Unit-L2 copy of ``v``; the zero vector stays zero (empty marker)."""
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    return v / n if n > 0.0 else np.zeros_like(v)


def is_empty_dense(v: np.ndarray) -> bool:
    return not np.any(v)


@dataclass
class WordVectorTable:
    """Raw (unnormalized) word vectors, all sharing one dimension."""

    vectors: dict[str, np.ndarray]
    dim: int

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, term: str) -> bool:
        return term in self.vectors


def load_word_vectors(path: str | Path) -> WordVectorTable:
    """Parse a word2vec text file: header ``count dim``, then term + floats lines.

    A line whose component count disagrees with the header is an error naming
    the line; a duplicate term keeps the last occurrence and emits a warning.
    """
    path = Path(path)
    if not path.exists():
        raise MissingResourceError(f"word vector file not found: {path}")
    vectors: dict[str, np.ndarray] = {}
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValidationError(f"{path}:1: expected header 'count dim'")
        try:
            dim = int(header[1])
        except ValueError:
            raise ValidationError(f"{path}:1: dimension is not an integer") from None
        if dim < 1:
            raise ValidationError(f"{path}:1: dimension must be >= 1")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            term, comps = parts[0], parts[1:]
            if len(comps) != dim:
                raise ValidationError(
                    f"{path}:{lineno}: expected {dim} components, got {len(comps)}"
                )
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric component") from None
            if not np.all(np.isfinite(vec)):
                raise ValidationError(f"{path}:{lineno}: non-finite component")
            if term in vectors:
                warnings.warn(f"duplicate term {term!r} in {path.name}; keeping the last")
            vectors[term] = vec
    return WordVectorTable(vectors=vectors, dim=dim)


def average_embedding(
    tokens: Iterable[str],
    table: WordVectorTable,
    weights: str = "uniform",
    vocab: Vocabulary | None = None,
) -> np.ndarray:
    """Mean (or idf-weighted mean) of the word vectors of the tokens, unit-L2.

    Tokens missing from the table are skipped; with idf weights, tokens
    outside the vocabulary are skipped too. If nothing remains the result is
    the zero vector, which downstream code treats as empty.
    """
    if weights not in ("uniform", "idf"):
        raise ValidationError(f"weights must be 'uniform' or 'idf', got {weights!r}")
    if weights == "idf" and vocab is None:
        raise ValidationError("idf weighting requires a vocabulary")
    acc = np.zeros(table.dim, dtype=np.float64)
    total = 0.0
    for term in tokens:
        vec = table.vectors.get(term)
        if vec is None:
            continue
        if weights == "idf":
            if term not in vocab:
                continue
            w = vocab.idf(term)
        else:
            w = 1.0
        acc += w * vec
        total += w
    if total == 0.0:
        return np.zeros(table.dim, dtype=np.float64)
    return normalize_dense(acc / total)


@dataclass
class TweetVectorFile:
    """Lookup table tweet id -> unit-L2 dense vector, all sharing one dimension."""

    vectors: dict[str, np.ndarray]
    dim: int

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, tweet_id: str) -> bool:
        return tweet_id in self.vectors

    def get(self, tweet_id: str) -> np.ndarray:
        try:
            return self.vectors[tweet_id]
        except KeyError:
            raise ValidationError(f"no vector for tweet id {tweet_id!r}") from None


def _finish_rows(rows: list[tuple[str, np.ndarray]], dim: int) -> TweetVectorFile:
    return TweetVectorFile(
        vectors={tid: normalize_dense(vec) for tid, vec in rows}, dim=dim
    )


def _load_tweet_vectors_tsv(path: Path) -> TweetVectorFile:
    rows: list[tuple[str, np.ndarray]] = []
    dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cells = line.rstrip("\n").split("\t")
            if len(cells) < 2:
                raise ValidationError(f"{path}:{lineno}: expected id + components")
            tid, comps = cells[0], cells[1:]
            if dim is None:
                dim = len(comps)
            elif len(comps) != dim:
                raise ValidationError(
                    f"{path}:{lineno}: dimension mismatch ({len(comps)} != {dim})"
                )
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric component") from None
            if not np.all(np.isfinite(vec)):
                raise ValidationError(f"{path}:{lineno}: NaN or infinite component")
            rows.append((tid, vec))
    if dim is None:
        raise ValidationError(f"{path}: tweet vector file contains no rows")
    return _finish_rows(rows, dim)


def _load_tweet_vectors_binary(path: Path) -> TweetVectorFile:
    data = path.read_bytes()
    if len(data) < 16 or data[:8] != TWVEC_MAGIC:
        raise ValidationError(f"{path}: not a TWVEC1 file (bad magic or truncated header)")
    count, dim = struct.unpack_from("<II", data, 8)
    if dim < 1:
        raise ValidationError(f"{path}: dimension must be >= 1")
    rows: list[tuple[str, np.ndarray]] = []
    offset = 16
    for k in range(count):
        if offset + 2 > len(data):
            raise ValidationError(f"{path}: truncated at record {k}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        end = offset + id_len + 4 * dim
        if end > len(data):
            raise ValidationError(f"{path}: truncated at record {k}")
        tid = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(np.float64)
        offset += 4 * dim
        if not np.all(np.isfinite(vec)):
            raise ValidationError(f"{path}: NaN or infinite component in record {k}")
        rows.append((tid, vec))
    if offset != len(data):
        raise ValidationError(f"{path}: {len(data) - offset} trailing bytes after {count} records")
    if not rows:
        raise ValidationError(f"{path}: tweet vector file contains no rows")
    return _finish_rows(rows, dim)


def load_tweet_vectors(path: str | Path, format: str | None = None) -> TweetVectorFile:
    """Load per-tweet vectors from TSV or TWVEC1 binary (sniffed by magic)."""
    path = Path(path)
    if not path.exists():
        raise MissingResourceError(f"tweet vector file not found: {path}")
    if format is None:
        with path.open("rb") as fh:
            format = "binary" if fh.read(8) == TWVEC_MAGIC else "tsv"
    if format == "tsv":
        return _load_tweet_vectors_tsv(path)
    if format == "binary":
        return _load_tweet_vectors_binary(path)
    raise ValidationError(f"unknown tweet vector format {format!r}")


def save_tweet_vectors(
    vectors: Mapping[str, np.ndarray], path: str | Path, format: str = "tsv"
) -> None:
    """Write per-tweet vectors in a format ``load_tweet_vectors`` reads back."""
    path = Path(path)
    items = list(vectors.items())
    if not items:
        raise ValidationError("refusing to write an empty tweet vector file")
    dims = {len(v) for _, v in items}
    if len(dims) != 1:
        raise ValidationError(f"inconsistent vector dimensions: {sorted(dims)}")
    dim = dims.pop()
    if format == "tsv":
        with path.open("w", encoding="utf-8") as fh:
            for tid, vec in items:
                comps = "\t".join(repr(float(x)) for x in vec)
                fh.write(f"{tid}\t{comps}\n")
    elif format == "binary":
        with path.open("wb") as fh:
            fh.write(TWVEC_MAGIC)
            fh.write(struct.pack("<II", len(items), dim))
            for tid, vec in items:
                raw = tid.encode("utf-8")
                if len(raw) > 0xFFFF:
                    raise ValidationError(f"tweet id too long to encode: {tid[:40]}...")
                fh.write(struct.pack("<H", len(raw)))
                fh.write(raw)
                fh.write(np.asarray(vec, dtype="<f4").tobytes())
    else:
        raise ValidationError(f"unknown tweet vector format {format!r}")


class WordVectorAverager:
    """Transformer: token lists -> unit-L2 averaged word vectors (rows of an array)."""

    def __init__(
        self,
        table: WordVectorTable,
        weights: str = "uniform",
        vocab: Vocabulary | None = None,
    ):
        if weights == "idf" and vocab is None:
            raise ValidationError("idf weighting requires a vocabulary")
        self.table = table
        self.weights = weights
        self.vocab = vocab

    def fit(self, X=None, y=None) -> "WordVectorAverager":
        return self

    def transform(self, X: Iterable[Iterable[str]]) -> np.ndarray:
        rows = [
            average_embedding(tokens, self.table, weights=self.weights, vocab=self.vocab)
            for tokens in X
        ]
        return np.vstack(rows) if rows else np.zeros((0, self.table.dim))

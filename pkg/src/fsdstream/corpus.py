"""Tweet corpora: loading, validation, chronological ordering, train/test splits.

Corpora arrive as local JSONL or TSV files. Every record carries a unique id,
a UTC epoch timestamp, the text, and an optional gold event label; records
without a label are kept (they matter for whole-corpus document-frequency
counts) but are excluded from classification splits and gold evaluation.

A :class:`Corpus` is immutable after construction and always sorted by
``(timestamp, id)``; the id tie-break makes runs reproducible when many
tweets share a second.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import MissingResourceError, ValidationError

FORMATS = ("jsonl", "tsv")
_TSV_HEADER = ["id", "timestamp", "text", "event_id"]


@dataclass(frozen=True)
class Tweet:
    """One timestamped document with an optional gold event label."""

    id: str
    timestamp: int
    text: str
    event_id: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("tweet id must be a non-empty string")
        if self.timestamp <= 0:
            raise ValidationError(f"tweet {self.id!r}: timestamp must be > 0")

    @property
    def annotated(self) -> bool:
        return self.event_id is not None


@dataclass(frozen=True)
class Corpus:
    """Chronologically ordered tweets; immutable, safe for concurrent reads."""

    tweets: tuple[Tweet, ...]
    name: str = ""
    language: str = ""

    def __post_init__(self) -> None:
        prev: tuple[int, str] | None = None
        for t in self.tweets:
            key = (t.timestamp, t.id)
            if prev is not None and key < prev:
                raise ValidationError(
                    "corpus must be sorted by (timestamp, id); "
                    f"tweet {t.id!r} is out of order"
                )
            prev = key

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    def __getitem__(self, i: int) -> Tweet:
        return self.tweets[i]

    @classmethod
    def from_tweets(
        cls, tweets, name: str = "", language: str = ""
    ) -> "Corpus":
        """Build a corpus from tweets in any order, sorting and checking id uniqueness."""
        ordered = tuple(sorted(tweets, key=lambda t: (t.timestamp, t.id)))
        seen: set[str] = set()
        for t in ordered:
            if t.id in seen:
                raise ValidationError(f"duplicate tweet id {t.id!r}")
            seen.add(t.id)
        return cls(ordered, name=name, language=language)

    def annotated(self) -> "Corpus":
        """The sub-corpus of gold-labeled tweets (order preserved)."""
        return Corpus(
            tuple(t for t in self.tweets if t.annotated),
            name=self.name,
            language=self.language,
        )

    def gold_labels(self) -> dict[str, str]:
        """Mapping tweet id -> gold event id over the annotated subset."""
        return {t.id: t.event_id for t in self.tweets if t.event_id is not None}

    def ids(self) -> list[str]:
        return [t.id for t in self.tweets]

    def span_seconds(self) -> int:
        """Seconds between the first and the last tweet (0 for < 2 tweets)."""
        if len(self.tweets) < 2:
            return 0
        return self.tweets[-1].timestamp - self.tweets[0].timestamp


def _tweet_from_record(record: dict, where: str) -> Tweet:
    for key in ("id", "timestamp", "text"):
        if key not in record:
            raise ValidationError(f"{where}: missing field {key!r}")
    tweet_id = record["id"]
    timestamp = record["timestamp"]
    text = record["text"]
    event_id = record.get("event_id")
    if not isinstance(tweet_id, str) or not tweet_id:
        raise ValidationError(f"{where}: id must be a non-empty string")
    if isinstance(timestamp, bool) or not isinstance(timestamp, int):
        raise ValidationError(f"{where}: timestamp must be an integer")
    if not isinstance(text, str):
        raise ValidationError(f"{where}: text must be a string")
    if event_id is not None and not isinstance(event_id, str):
        raise ValidationError(f"{where}: event_id must be a string or null")
    try:
        return Tweet(tweet_id, timestamp, text, event_id or None)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def _load_jsonl(path: Path) -> list[Tweet]:
    tweets = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise ValidationError(f"{where}: record must be a JSON object")
            tweets.append(_tweet_from_record(record, where))
    return tweets


def _load_tsv(path: Path) -> list[Tweet]:
    tweets = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            return []
        if header != _TSV_HEADER:
            raise ValidationError(
                f"{path}:1: TSV header must be {_TSV_HEADER}, got {header}"
            )
        for row in reader:
            if not row:
                continue
            where = f"{path}:{reader.line_num}"
            if len(row) != 4:
                raise ValidationError(f"{where}: expected 4 columns, got {len(row)}")
            raw_id, raw_ts, text, raw_event = row
            try:
                timestamp = int(raw_ts)
            except ValueError:
                raise ValidationError(
                    f"{where}: timestamp must be an integer, got {raw_ts!r}"
                ) from None
            record = {
                "id": raw_id,
                "timestamp": timestamp,
                "text": text,
                "event_id": raw_event or None,
            }
            tweets.append(_tweet_from_record(record, where))
    return tweets


def infer_format(path: Path) -> str:
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("jsonl", "json", "ndjson"):
        return "jsonl"
    if suffix in ("tsv", "tab"):
        return "tsv"
    raise ValidationError(
        f"cannot infer corpus format from {path.name!r}; pass format explicitly"
    )


def load_corpus(
    path: str | Path,
    format: str | None = None,
    name: str | None = None,
    language: str = "",
) -> Corpus:
    """Load, validate and chronologically order a corpus file.

    Malformed records raise :class:`ValidationError` naming the line,
    duplicate ids raise naming the id, and an empty file is rejected.
    """
    path = Path(path)
    if not path.exists():
        raise MissingResourceError(f"corpus file not found: {path}")
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise ValidationError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    tweets = _load_jsonl(path) if fmt == "jsonl" else _load_tsv(path)
    if not tweets:
        raise ValidationError(f"{path}: corpus file contains no records")
    return Corpus.from_tweets(
        tweets, name=name if name is not None else path.stem, language=language
    )


def save_corpus(corpus: Corpus, path: str | Path, format: str | None = None) -> None:
    """Write a corpus back to disk; load(save(c)) is identity on all four fields."""
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for t in corpus:
                record = {"id": t.id, "timestamp": t.timestamp, "text": t.text}
                if t.event_id is not None:
                    record["event_id"] = t.event_id
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    elif fmt == "tsv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(_TSV_HEADER)
            for t in corpus:
                writer.writerow([t.id, t.timestamp, t.text, t.event_id or ""])
    else:
        raise ValidationError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")


def split_train_test(
    corpus: Corpus, fraction: float, seed: int
) -> tuple[Corpus, Corpus]:
    """Random split of the annotated subset into (train, test).

    Unannotated tweets are excluded. Train size is round(fraction * n);
    the split is deterministic for a fixed seed and both halves come back
    chronologically sorted.
    """
    if not 0.0 < fraction < 1.0:
        raise ValidationError(f"fraction must be in (0, 1), got {fraction}")
    if len(corpus) == 0:
        raise ValidationError("cannot split an empty corpus")
    annotated = [t for t in corpus if t.annotated]
    n_train = int(round(fraction * len(annotated)))
    rng = random.Random(seed)
    train_idx = set(rng.sample(range(len(annotated)), n_train))
    train = [t for i, t in enumerate(annotated) if i in train_idx]
    test = [t for i, t in enumerate(annotated) if i not in train_idx]
    return (
        Corpus.from_tweets(train, name=f"{corpus.name}-train", language=corpus.language),
        Corpus.from_tweets(test, name=f"{corpus.name}-test", language=corpus.language),
    )

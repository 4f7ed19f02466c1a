"""Run configuration: a flat INI file with sections, overridable by CLI flags.

Every report embeds the fully resolved configuration so an experiment can be
reproduced from its own output.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import MissingResourceError, ValidationError
from .preprocess import TokenizerConfig

VECTOR_SOURCES = ("idf-dataset", "idf-all-tweets", "w2v-mean", "w2v-idf-mean", "external")

# spans the useful cosine-distance range; optimal thresholds reported for
# common representations all fall inside [0.02, 0.8]
DEFAULT_SWEEP_GRID = [
    0.02, 0.04, 0.06, 0.08, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40,
    0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80,
]


@dataclass
class RunConfig:
    corpus_path: Path | None = None
    corpus_format: str | None = None
    corpus_name: str | None = None
    stopwords: str = "none"
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    vector_source: str = "idf-all-tweets"
    df_min: int = 10
    word_vectors_path: Path | None = None
    tweet_vectors_path: Path | None = None
    vocabulary_path: Path | None = None
    threshold: float = 0.75
    window: int = 0  # 0 -> size for about one day of history
    batch_size: int = 8
    sweep_grid: list[float] = field(default_factory=lambda: list(DEFAULT_SWEEP_GRID))
    svm_c: float = 1.0
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    split_fraction: float = 0.5
    out_dir: Path = Path("runs")
    seed: int = 0

    def validate(self) -> None:
        if self.vector_source not in VECTOR_SOURCES:
            raise ValidationError(
                f"vector source must be one of {VECTOR_SOURCES}, got {self.vector_source!r}"
            )
        if not 0.0 <= self.threshold <= 2.0:
            raise ValidationError(f"threshold must be in [0, 2], got {self.threshold}")
        if self.window < 0:
            raise ValidationError(f"window must be >= 0, got {self.window}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValidationError(
                f"split fraction must be in (0, 1), got {self.split_fraction}"
            )
        if self.svm_c <= 0:
            raise ValidationError(f"C must be > 0, got {self.svm_c}")
        if self.df_min < 1:
            raise ValidationError(f"df_min must be >= 1, got {self.df_min}")
        for t in self.sweep_grid:
            if not 0.0 <= t <= 2.0:
                raise ValidationError(f"sweep threshold {t} outside [0, 2]")
        if not self.seeds:
            raise ValidationError("at least one seed is required")
        for label, path in [
            ("corpus", self.corpus_path),
            ("word vector file", self.word_vectors_path),
            ("tweet vector file", self.tweet_vectors_path),
            ("vocabulary file", self.vocabulary_path),
        ]:
            if path is not None and not Path(path).exists():
                raise MissingResourceError(f"{label} not found: {path}")
        if self.vector_source in ("w2v-mean", "w2v-idf-mean") and self.word_vectors_path is None:
            raise ValidationError(f"vector source {self.vector_source} needs word_vectors")
        if self.vector_source == "external" and self.tweet_vectors_path is None:
            raise ValidationError("vector source external needs tweet_vectors")

    def require_corpus(self) -> Path:
        if self.corpus_path is None:
            raise ValidationError("no corpus given (use --corpus or the [corpus] section)")
        return self.corpus_path

    def resolved(self) -> dict:
        """Plain-serializable view embedded in every report for provenance."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, TokenizerConfig):
                value = {
                    "strip_urls": value.strip_urls,
                    "strip_mentions": value.strip_mentions,
                    "keep_hashtag_body": value.keep_hashtag_body,
                    "lowercase": value.lowercase,
                }
            out[f.name] = value
        return out


def _parse_floats(raw: str) -> list[float]:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    try:
        return [float(p) for p in parts if p]
    except ValueError:
        raise ValidationError(f"expected a list of numbers, got {raw!r}") from None


def _parse_ints(raw: str) -> list[int]:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    try:
        return [int(p) for p in parts if p]
    except ValueError:
        raise ValidationError(f"expected a list of integers, got {raw!r}") from None


def load_config(path: str | Path) -> RunConfig:
    """Parse an INI config file into a RunConfig."""
    path = Path(path)
    if not path.exists():
        raise MissingResourceError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None

    cfg = RunConfig()

    def get(section: str, option: str) -> str | None:
        return parser.get(section, option, fallback=None)

    def getbool(section: str, option: str, default: bool) -> bool:
        try:
            value = parser.getboolean(section, option, fallback=default)
        except ValueError:
            raise ValidationError(f"{path}: [{section}] {option} must be a boolean") from None
        return value

    def convert(section: str, option: str, conv, raw: str):
        try:
            return conv(raw)
        except ValueError:
            raise ValidationError(
                f"{path}: [{section}] {option} has invalid value {raw!r}"
            ) from None

    if raw := get("corpus", "path"):
        cfg.corpus_path = Path(raw)
    cfg.corpus_format = get("corpus", "format") or None
    cfg.corpus_name = get("corpus", "name") or None

    cfg.tokenizer = TokenizerConfig(
        strip_urls=getbool("tokenizer", "strip_urls", True),
        strip_mentions=getbool("tokenizer", "strip_mentions", True),
        keep_hashtag_body=getbool("tokenizer", "keep_hashtag_body", True),
        lowercase=getbool("tokenizer", "lowercase", True),
    )
    if raw := get("tokenizer", "stopwords"):
        cfg.stopwords = raw

    if raw := get("vectors", "source"):
        cfg.vector_source = raw
    if raw := get("vectors", "df_min"):
        cfg.df_min = convert("vectors", "df_min", int, raw)
    if raw := get("vectors", "word_vectors"):
        cfg.word_vectors_path = Path(raw)
    if raw := get("vectors", "tweet_vectors"):
        cfg.tweet_vectors_path = Path(raw)
    if raw := get("vectors", "vocabulary"):
        cfg.vocabulary_path = Path(raw)

    if raw := get("cluster", "threshold"):
        cfg.threshold = convert("cluster", "threshold", float, raw)
    if raw := get("cluster", "window"):
        cfg.window = convert("cluster", "window", int, raw)
    if raw := get("cluster", "batch_size"):
        cfg.batch_size = convert("cluster", "batch_size", int, raw)

    if raw := get("sweep", "grid"):
        cfg.sweep_grid = _parse_floats(raw)

    if raw := get("classify", "c"):
        cfg.svm_c = convert("classify", "c", float, raw)
    if raw := get("classify", "seeds"):
        cfg.seeds = _parse_ints(raw)
    if raw := get("classify", "split_fraction"):
        cfg.split_fraction = convert("classify", "split_fraction", float, raw)

    if raw := get("output", "dir"):
        cfg.out_dir = Path(raw)
    if raw := get("output", "seed"):
        cfg.seed = convert("output", "seed", int, raw)
    return cfg

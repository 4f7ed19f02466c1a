"""Deterministic tweet tokenization feeding every vectorizer.

URLs and @mentions are near-unique strings that pollute document-frequency
statistics, so the defaults strip them; hashtag bodies carry topical content
and are kept. Splitting is Unicode-aware (runs of letters and digits form
tokens, everything else separates, apostrophes included) so French and
English behave the same way. No stemming, no lemmatization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MissingResourceError

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")
# \w minus underscore: Unicode letters, digits and combining marks
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class TokenizerConfig:
    strip_urls: bool = True
    strip_mentions: bool = True
    keep_hashtag_body: bool = True
    lowercase: bool = True


DEFAULT_TOKENIZER = TokenizerConfig()


def tokenize(text: str, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Split a tweet into normalized tokens; may return an empty list."""
    if config.strip_urls:
        text = _URL_RE.sub(" ", text)
    if config.strip_mentions:
        text = _MENTION_RE.sub(" ", text)
    if config.keep_hashtag_body:
        text = text.replace("#", " ")
    else:
        text = _HASHTAG_RE.sub(" ", text)
    if config.lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def load_stopwords(name_or_path: str | Path) -> frozenset[str]:
    """Load a stopword list: a bundled language name or a path to a text file.

    One word per line, blank lines ignored; words are lowercased. The
    bundled lists are ``english`` and ``french``; ``none`` yields the
    empty set.
    """
    if str(name_or_path) in ("", "none"):
        return frozenset()
    path = Path(name_or_path)
    if path.is_file():
        content = path.read_text(encoding="utf-8")
    else:
        bundled = resources.files("fsdstream").joinpath(
            f"resources/stopwords/{name_or_path}.txt"
        )
        if not bundled.is_file():
            raise MissingResourceError(
                f"no stopword list named {str(name_or_path)!r} "
                "(expected a file path or a bundled language name)"
            )
        content = bundled.read_text(encoding="utf-8")
    return frozenset(
        line.strip().lower() for line in content.splitlines() if line.strip()
    )

"""Text preparation: unify title/description, clean, tokenize, drop stopwords.

Every function here is pure. Settings travel in an immutable
:class:`PreprocessConfig` so identical settings can be fingerprinted and
shared between index builds and queries.
"""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

__all__ = [
    "InputMode",
    "PreprocessConfig",
    "UnifiedText",
    "DEFAULT_STOPWORDS",
    "DEFAULT_CONFIG",
    "load_stopwords",
    "unify",
    "clean",
    "tokenize_and_filter",
    "prepare",
]


class InputMode(str, Enum):
    """Which fields of a record feed the retrieval text."""

    TITLE_ONLY = "title"
    TITLE_AND_DESCRIPTION = "title_description"


# Bundled English stopword list (~170 entries, lowercase). Contraction
# fragments ("don", "t", ...) are listed separately because tokenization
# splits on apostrophes.
_ENGLISH_STOPWORDS = """
i me my myself we our ours ourselves you you're you've you'll you'd your
yours yourself yourselves he him his himself she she's her hers herself it
it's its itself they them their theirs themselves what which who whom this
that that'll these those am is are was were be been being have has had
having do does did doing a an the and but if or because as until while of
at by for with about against between into through during before after
above below to from up down in out on off over under again further then
once here there when where why how all any both each few more most other
some such no nor not only own same so than too very s t can will just don
don't should should've now d ll m o re ve y ain aren aren't couldn
couldn't didn didn't doesn doesn't hadn hadn't hasn hasn't haven haven't
isn isn't ma mightn mightn't mustn mustn't needn needn't shan shan't
shouldn shouldn't wasn wasn't weren weren't won won't wouldn wouldn't
""".split()

DEFAULT_STOPWORDS: frozenset[str] = frozenset(_ENGLISH_STOPWORDS)

_WHITESPACE_RE = re.compile(r"\s+")
# Maximal runs of alphanumeric characters; underscore counts as a separator.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword list, one token per line (UTF-8), ignoring blanks."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word:
            words.append(word)
    return frozenset(words)


@dataclass(frozen=True)
class PreprocessConfig:
    """Cleaning and tokenization settings.

    The stopword list must already be lowercase; ``load_stopwords``
    normalizes files on the way in.
    """

    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    strip_emoji: bool = True
    lowercase: bool = True

    def __post_init__(self) -> None:
        offenders = [w for w in self.stopwords if w != w.lower()]
        if offenders:
            raise ValueError(f"stopword list must be lowercase, got {offenders[:5]!r}")

    def digest(self) -> str:
        """Stable fingerprint of these settings, used in index fingerprints."""
        h = hashlib.sha256()
        for word in sorted(self.stopwords):
            h.update(word.encode("utf-8"))
            h.update(b"\x00")
        h.update(f"strip_emoji={self.strip_emoji};lowercase={self.lowercase}".encode())
        return h.hexdigest()[:16]


DEFAULT_CONFIG = PreprocessConfig()


@dataclass(frozen=True)
class UnifiedText:
    """Cleaned retrieval text for one record plus bookkeeping fields."""

    text: str
    tokens: tuple[str, ...]
    source_mode: InputMode
    raw_description_length: int

    @property
    def token_count(self) -> int:
        return len(self.tokens)


def unify(title: str, description: str, mode: InputMode) -> str:
    """Concatenate title and description according to ``mode``.

    An empty description degrades to the title alone; an empty title is an
    error because every record must contribute at least some text.
    """
    if not title.strip():
        raise ValueError("title must be non-empty")
    if mode is InputMode.TITLE_ONLY or not description.strip():
        return title
    return f"{title} {description}"


def clean(raw: str, config: PreprocessConfig = DEFAULT_CONFIG) -> str:
    """Normalize raw text to a single-spaced, printable form.

    Control and other non-printing codepoints become spaces. With
    ``strip_emoji`` set, codepoints in the Unicode Symbol categories are
    dropped as well (emoji, dingbats, math symbols); letters, digits, marks,
    and punctuation survive. The result is idempotent under re-cleaning.
    """
    out: list[str] = []
    for ch in raw:
        cat = unicodedata.category(ch)
        if cat.startswith("C"):
            out.append(" ")
        elif config.strip_emoji and cat.startswith("S"):
            out.append(" ")
        else:
            out.append(ch)
    text = "".join(out)
    if config.lowercase:
        text = text.lower()
    return _WHITESPACE_RE.sub(" ", text).strip()


def tokenize_and_filter(
    cleaned: str, config: PreprocessConfig = DEFAULT_CONFIG
) -> list[str]:
    """Split cleaned text on non-alphanumeric runs and drop stopwords.

    Token order is preserved; no stemming or other normalization happens
    here.
    """
    return [
        token
        for token in _TOKEN_RE.findall(cleaned)
        if token.lower() not in config.stopwords
    ]


def prepare(
    title: str,
    description: str,
    mode: InputMode,
    config: PreprocessConfig = DEFAULT_CONFIG,
    *,
    extra_text: str = "",
) -> UnifiedText:
    """Run the full preparation pipeline for one record.

    ``extra_text`` is appended before cleaning; the service uses it to fold
    auxiliary evidence (linked report titles) into an incident's indexed
    text without touching the stored record.
    """
    raw = unify(title, description, mode)
    if extra_text.strip():
        raw = f"{raw} {extra_text}"
    cleaned = clean(raw, config)
    tokens = tuple(tokenize_and_filter(cleaned, config))
    return UnifiedText(
        text=cleaned,
        tokens=tokens,
        source_mode=mode,
        raw_description_length=len(description),
    )

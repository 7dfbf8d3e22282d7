"""Persian-aware text cleanup: normalization, tokenization, stopwords, stemming.

The four steps are deliberately rule-based and dependency-free so the whole
pipeline stays deterministic and testable:

* ``normalize``   -- Unicode NFC, Arabic->Persian letter unification, diacritic
                     removal, digit unification, whitespace collapse, ZWNJ cleanup.
* ``tokenize``    -- whitespace split with punctuation as single-char tokens,
                     offsets into the normalized text.
* ``remove_stopwords`` -- plain surface-form filtering against a stoplist.
* ``stem``        -- longest-match single-pass suffix stripping.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

ZWNJ = "‌"

# Arabic letters that Persian text mixes in and their Persian counterparts.
_CHAR_MAP = {
    "ي": "ی",  # ARABIC YEH -> FARSI YEH
    "ك": "ک",  # ARABIC KAF -> KEHEH
}
# Arabic-Indic digits -> Extended (Persian) digits.
_CHAR_MAP.update({chr(0x0660 + i): chr(0x06F0 + i) for i in range(10)})

# Harakat and friends (U+064B..U+065F) plus tatweel; dropped entirely.
_DROP = frozenset(chr(c) for c in range(0x064B, 0x0660)) | {"ـ"}

_ZWNJ_RUN = re.compile(ZWNJ + "{2,}")

# Persian sentence punctuation is already in category Po, but listed
# explicitly because the tokenizer contract names it.
_EXTRA_PUNCT = frozenset("،؛؟")  # ، ؛ ؟


def normalize(text: str) -> str:
    """Canonicalize a Persian (or mixed) string.

    Idempotent: ``normalize(normalize(t)) == normalize(t)``. Whitespace runs
    collapse to single ASCII spaces and the ends are stripped; ZWNJ survives
    only strictly inside words.
    """
    text = unicodedata.normalize("NFC", text)
    text = "".join(_CHAR_MAP.get(ch, ch) for ch in text if ch not in _DROP)
    chunks = []
    for chunk in text.split():
        chunk = _ZWNJ_RUN.sub(ZWNJ, chunk).strip(ZWNJ)
        if chunk:
            chunks.append(chunk)
    # Final NFC keeps the fixpoint contract even when a removed diacritic
    # leaves a base+mark pair that recomposes.
    return unicodedata.normalize("NFC", " ".join(chunks))


@dataclass(frozen=True)
class Token:
    """One token with half-open character offsets into its source text."""

    surface: str
    start: int
    end: int
    is_punct: bool = False


def _is_punct_char(ch: str) -> bool:
    if ch in _EXTRA_PUNCT:
        return True
    cat = unicodedata.category(ch)
    return cat[0] in ("P", "S")


def tokenize(text: str) -> list[Token]:
    """Split on whitespace; punctuation/symbol characters become single-char
    tokens. ZWNJ is word-internal and never splits.

    The caller is expected to pass normalized text; offsets refer to exactly
    the string given.
    """
    tokens: list[Token] = []
    start = -1
    for i, ch in enumerate(text):
        if ch.isspace():
            if start >= 0:
                tokens.append(Token(text[start:i], start, i))
                start = -1
        elif _is_punct_char(ch):
            if start >= 0:
                tokens.append(Token(text[start:i], start, i))
                start = -1
            tokens.append(Token(ch, i, i + 1, is_punct=True))
        else:
            if start < 0:
                start = i
    if start >= 0:
        tokens.append(Token(text[start:], start, len(text)))
    return tokens


@dataclass(frozen=True)
class Stoplist:
    """Set of normalized words to drop. Entries are normalization-stable."""

    words: frozenset[str]

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)


def load_stoplist(path: str | Path) -> Stoplist:
    """Read a stoplist file: one word per line, '#' lines are comments."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word = normalize(line)
            if word:
                words.add(word)
    return Stoplist(frozenset(words))


def default_stoplist() -> Stoplist:
    """The stoplist shipped with the package."""
    ref = resources.files("pabsa") / "resources" / "stopwords_fa.txt"
    with resources.as_file(ref) as path:
        return load_stoplist(path)


def remove_stopwords(tokens: Sequence[Token], stoplist: Stoplist) -> list[Token]:
    """Drop tokens whose surface is stoplisted; survivors keep their offsets."""
    return [t for t in tokens if t.surface not in stoplist]


# Suffix table, in the fixed order used for equal-length ties. Each suffix
# also matches with a preceding ZWNJ. Longest match wins; a match never
# shortens the word below 2 characters.
_SUFFIXES = (
    "ها",                    # ها
    "ان",                    # ان
    "تر",                    # تر
    "ترین",        # ترین
    "ام",                    # ام
    "ات",                    # ات
    "اش",                    # اش
    "مان",              # مان
    "تان",              # تان
    "شان",              # شان
)

_SUFFIX_CANDIDATES = tuple(
    sorted(
        [ZWNJ + s for s in _SUFFIXES] + list(_SUFFIXES),
        key=lambda c: (-len(c), _SUFFIXES.index(c.lstrip(ZWNJ))),
    )
)


def stem(word: str) -> str:
    """Strip at most one suffix from the table (optionally ZWNJ-attached)."""
    for cand in _SUFFIX_CANDIDATES:
        if word.endswith(cand) and len(word) - len(cand) >= 2:
            return word[: -len(cand)]
    return word


def feature_tokens(
    text: str,
    stoplist: Stoplist | None = None,
    stemming: bool = False,
) -> list[str]:
    """Full preprocessing for feature extraction: normalize, tokenize, drop
    punctuation, remove stopwords, then stem. Returns bare surfaces."""
    tokens = tokenize(normalize(text))
    if stoplist is not None:
        tokens = remove_stopwords(tokens, stoplist)
    surfaces = [t.surface for t in tokens if not t.is_punct]
    if stemming:
        surfaces = [stem(s) for s in surfaces]
    return surfaces

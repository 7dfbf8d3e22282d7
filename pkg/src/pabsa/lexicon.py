"""Synonym and named-entity dictionaries used for lookup and augmentation.

Both resources are plain UTF-8 TSV files, '#' lines ignored:

    synonyms:  headword<TAB>syn1|syn2|...
    entities:  surface<TAB>TypeTag

All surfaces and synonyms are normalized on load, so lookups tolerate
Arabic/Persian character variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .preprocess import normalize


class LexiconError(ValueError):
    """Malformed dictionary file or inconsistent entries."""


@dataclass(frozen=True)
class SynonymLexicon:
    """Headword -> ordered, duplicate-free synonym lists (directed relation)."""

    entries: dict[str, tuple[str, ...]]

    def __post_init__(self):
        for head, syns in self.entries.items():
            if not syns:
                raise LexiconError(f"empty synonym list for {head!r}")
            if head in syns:
                raise LexiconError(f"{head!r} listed as its own synonym")

    def synonyms_of(self, word: str) -> list[str]:
        """Stored synonyms of the normalized query, empty when absent."""
        return list(self.entries.get(normalize(word), ()))

    def __len__(self) -> int:
        return len(self.entries)


def load_synonyms(path: str | Path) -> SynonymLexicon:
    path = Path(path)
    entries: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"{path}:{lineno}: expected 'head<TAB>syn|syn|...'")
            head = normalize(parts[0])
            syns = [normalize(s) for s in parts[1].split("|") if normalize(s)]
            if not head or not syns:
                raise LexiconError(f"{path}:{lineno}: empty headword or synonym list")
            if head in syns:
                raise LexiconError(f"{path}:{lineno}: {head!r} listed as its own synonym")
            bucket = entries.setdefault(head, [])
            for s in syns:
                if s not in bucket:
                    bucket.append(s)
    return SynonymLexicon({h: tuple(s) for h, s in entries.items()})


def synonyms_of(lexicon: SynonymLexicon, word: str) -> list[str]:
    return lexicon.synonyms_of(word)


@dataclass(frozen=True)
class EntityDictionary:
    """Entity surface -> type tag, plus the inverse grouping in file order."""

    entries: dict[str, str]
    by_type: dict[str, tuple[str, ...]]

    def __post_init__(self):
        inverse: dict[str, list[str]] = {}
        for surface, tag in self.entries.items():
            inverse.setdefault(tag, []).append(surface)
        if {t: set(s) for t, s in inverse.items()} != {
            t: set(s) for t, s in self.by_type.items()
        }:
            raise LexiconError("by_type is not the inverse of entries")

    def entity_type(self, phrase: str) -> Optional[str]:
        return self.entries.get(normalize(phrase))

    def entities_of_type(self, tag: str) -> list[str]:
        return list(self.by_type.get(tag, ()))

    def max_surface_words(self) -> int:
        """Longest surface, measured in space-separated words."""
        if not self.entries:
            return 0
        return max(len(s.split(" ")) for s in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def load_entities(path: str | Path) -> EntityDictionary:
    path = Path(path)
    entries: dict[str, str] = {}
    by_type: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"{path}:{lineno}: expected 'surface<TAB>TypeTag'")
            surface = normalize(parts[0])
            tag = parts[1].strip()
            if not surface or not tag:
                raise LexiconError(f"{path}:{lineno}: empty surface or type tag")
            if surface in entries:
                if entries[surface] != tag:
                    raise LexiconError(
                        f"{path}:{lineno}: {surface!r} listed under both "
                        f"{entries[surface]!r} and {tag!r}"
                    )
                continue  # identical re-listing
            entries[surface] = tag
            by_type.setdefault(tag, []).append(surface)
    return EntityDictionary(entries, {t: tuple(s) for t, s in by_type.items()})


def entity_type(dictionary: EntityDictionary, phrase: str) -> Optional[str]:
    return dictionary.entity_type(phrase)


def entities_of_type(dictionary: EntityDictionary, tag: str) -> list[str]:
    return dictionary.entities_of_type(tag)

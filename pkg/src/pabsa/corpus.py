"""Aspect-annotated dataset handling: loading, validation, stats, splitting.

The on-disk format is UTF-8 JSON lines, one record per aspect target:

    {"id": "...", "text": "...", "aspect_term": "...",
     "aspect_start": 0, "aspect_end": 4, "label": "positive"}

Offsets count Unicode scalar characters (Python string indices), never bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterator, Optional, Sequence

from . import preprocess
from .rng import SplitMix64, shuffled


class DatasetError(ValueError):
    """Malformed dataset file or record."""


class Polarity(IntEnum):
    """Three-way sentiment label with a fixed, serialization-stable encoding."""

    POSITIVE = 0
    NEUTRAL = 1
    NEGATIVE = 2

    @classmethod
    def from_string(cls, s: str) -> "Polarity":
        try:
            return _POLARITY_BY_NAME[s]
        except KeyError:
            raise DatasetError(f"unknown label {s!r}") from None

    def to_string(self) -> str:
        return self.name.lower()


_POLARITY_BY_NAME = {p.name.lower(): p for p in Polarity}


@dataclass(frozen=True)
class AspectInstance:
    """One (comment, aspect span, label) triple.

    ``label`` may be None only for inputs meant to be labeled by ``predict``;
    every training/evaluation path requires it.
    """

    id: str
    text: str
    aspect_term: str
    aspect_start: int
    aspect_end: int
    label: Optional[Polarity]

    def __post_init__(self):
        if not self.id:
            raise DatasetError("instance id must be non-empty")
        if not (0 <= self.aspect_start < self.aspect_end <= len(self.text)):
            raise DatasetError(
                f"instance {self.id!r}: aspect span "
                f"[{self.aspect_start}, {self.aspect_end}) out of range for "
                f"text of length {len(self.text)}"
            )
        got = self.text[self.aspect_start : self.aspect_end]
        if got != self.aspect_term:
            raise DatasetError(
                f"instance {self.id!r}: text slice {got!r} does not match "
                f"aspect_term {self.aspect_term!r}"
            )

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "text": self.text,
            "aspect_term": self.aspect_term,
            "aspect_start": self.aspect_start,
            "aspect_end": self.aspect_end,
        }
        if self.label is not None:
            rec["label"] = self.label.to_string()
        return rec


class Dataset:
    """Immutable ordered collection of AspectInstance with unique ids."""

    def __init__(self, instances: Sequence[AspectInstance]):
        self._instances = tuple(instances)
        seen: set[str] = set()
        for inst in self._instances:
            if inst.id in seen:
                raise DatasetError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)

    @property
    def instances(self) -> tuple[AspectInstance, ...]:
        return self._instances

    def __len__(self) -> int:
        return len(self._instances)

    def __iter__(self) -> Iterator[AspectInstance]:
        return iter(self._instances)

    def __getitem__(self, i: int) -> AspectInstance:
        return self._instances[i]

    def ids(self) -> list[str]:
        return [inst.id for inst in self._instances]

    def comments(self) -> list[list[AspectInstance]]:
        """Group instances by identical comment text, first-appearance order.

        The groups partition the dataset: one comment may carry several
        aspect targets.
        """
        groups: dict[str, list[AspectInstance]] = {}
        for inst in self._instances:
            groups.setdefault(inst.text, []).append(inst)
        return list(groups.values())


_REQUIRED_FIELDS = ("id", "text", "aspect_term", "aspect_start", "aspect_end")


def _parse_record(obj: dict, require_label: bool) -> AspectInstance:
    if not isinstance(obj, dict):
        raise DatasetError("record is not an object")
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise DatasetError(f"missing field {name!r}")
    for name in ("id", "text", "aspect_term"):
        if not isinstance(obj[name], str):
            raise DatasetError(f"field {name!r} must be a string")
    for name in ("aspect_start", "aspect_end"):
        if not isinstance(obj[name], int) or isinstance(obj[name], bool):
            raise DatasetError(f"field {name!r} must be an integer")
    label = None
    if "label" in obj and obj["label"] is not None:
        if not isinstance(obj["label"], str):
            raise DatasetError("field 'label' must be a string")
        label = Polarity.from_string(obj["label"])
    elif require_label:
        raise DatasetError("missing field 'label'")
    return AspectInstance(
        id=obj["id"],
        text=obj["text"],
        aspect_term=obj["aspect_term"],
        aspect_start=obj["aspect_start"],
        aspect_end=obj["aspect_end"],
        label=label,
    )


def load_dataset(path: str | Path, require_label: bool = True) -> Dataset:
    """Load a JSONL dataset file, validating every record.

    Errors name the offending line. Blank lines are ignored. An empty file
    yields an empty Dataset.
    """
    path = Path(path)
    instances: list[AspectInstance] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                inst = _parse_record(obj, require_label)
            except (json.JSONDecodeError, DatasetError) as e:
                raise DatasetError(f"{path}:{lineno}: {e}") from None
            if inst.id in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate instance id {inst.id!r}")
            seen.add(inst.id)
            instances.append(inst)
    return Dataset(instances)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset in the JSONL format read by ``load_dataset``."""
    with open(path, "w", encoding="utf-8") as fh:
        for inst in dataset:
            fh.write(json.dumps(inst.to_record(), ensure_ascii=False))
            fh.write("\n")


@dataclass(frozen=True)
class CorpusStats:
    """Dataset summary in the shape of the usual corpus property tables."""

    n_targets: int
    n_positive: int
    n_neutral: int
    n_negative: int
    n_tokens: int
    n_unique_words: int
    n_comments: int
    avg_words_per_comment: float
    text_len_avg: float
    text_len_max: int
    text_len_min: int


def dataset_stats(dataset: Dataset) -> CorpusStats:
    """Compute corpus statistics.

    Token counts run the package tokenizer over each distinct comment
    (normalized first); punctuation tokens count like any other token.
    Text lengths are Unicode character counts of the raw comment text.
    """
    if len(dataset) == 0:
        raise DatasetError("cannot compute stats of an empty dataset")
    class_counts = [0, 0, 0]
    for inst in dataset:
        if inst.label is None:
            raise DatasetError(f"instance {inst.id!r} has no label")
        class_counts[int(inst.label)] += 1

    n_tokens = 0
    unique: set[str] = set()
    lengths: list[int] = []
    groups = dataset.comments()
    for group in groups:
        text = group[0].text
        toks = preprocess.tokenize(preprocess.normalize(text))
        n_tokens += len(toks)
        unique.update(t.surface for t in toks)
        lengths.append(len(text))

    n_comments = len(groups)
    return CorpusStats(
        n_targets=len(dataset),
        n_positive=class_counts[0],
        n_neutral=class_counts[1],
        n_negative=class_counts[2],
        n_tokens=n_tokens,
        n_unique_words=len(unique),
        n_comments=n_comments,
        avg_words_per_comment=n_tokens / n_comments,
        text_len_avg=sum(lengths) / n_comments,
        text_len_max=max(lengths),
        text_len_min=min(lengths),
    )


def split(
    dataset: Dataset,
    train_ratio: float,
    seed: int,
    granularity: str = "target",
) -> tuple[Dataset, Dataset]:
    """Deterministic train/test split.

    Units are shuffled with Fisher-Yates over SplitMix64(seed); the train
    side takes floor(train_ratio * n_units) units, the rest go to test.
    With ``granularity="comment"`` every unit is one comment group, so
    instances sharing a text never straddle the partition.
    """
    if len(dataset) == 0:
        raise DatasetError("cannot split an empty dataset")
    if not (0.0 < train_ratio < 1.0):
        raise ValueError(f"train_ratio must be in (0, 1), got {train_ratio}")
    if granularity == "target":
        units: list[list[AspectInstance]] = [[inst] for inst in dataset]
    elif granularity == "comment":
        units = dataset.comments()
    else:
        raise ValueError(f"unknown granularity {granularity!r}")

    order = shuffled(units, SplitMix64(seed))
    n_train = math.floor(train_ratio * len(order))
    if n_train == 0 or n_train == len(order):
        raise ValueError(
            f"split of {len(order)} units at ratio {train_ratio} leaves one side empty"
        )
    train = [inst for unit in order[:n_train] for inst in unit]
    test = [inst for unit in order[n_train:] for inst in unit]
    return Dataset(train), Dataset(test)

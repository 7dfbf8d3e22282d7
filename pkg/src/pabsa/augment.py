"""Label-preserving augmentation: synonym replacement and entity replacement.

Replacements are decided against the *source* text: tokens are looked up via
their normalized surface, but spans always index the original string, so one
splice produces the augmented text and an audit that replays exactly.

Determinism contract: identical (instance, resources, rate, seed) give
identical output. ``augment_dataset`` derives one seed per variant from
``seed ^ instance_index ^ copy_index``, so instances can be augmented in any
order (or in parallel) with the same result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .corpus import AspectInstance, Dataset
from .lexicon import EntityDictionary, SynonymLexicon
from .preprocess import normalize, tokenize
from .rng import SplitMix64


@dataclass(frozen=True)
class AugmentConfig:
    synonym_rate: float = 0.1
    entity_rate: float = 0.1
    seed: int = 42
    protect_aspect: bool = True
    copies: int = 1

    def __post_init__(self):
        if not (0.0 <= self.synonym_rate <= 1.0):
            raise ValueError(f"synonym_rate must be in [0, 1], got {self.synonym_rate}")
        if not (0.0 <= self.entity_rate <= 1.0):
            raise ValueError(f"entity_rate must be in [0, 1], got {self.entity_rate}")
        if self.copies < 1:
            raise ValueError(f"copies must be >= 1, got {self.copies}")


@dataclass(frozen=True)
class Replacement:
    """One substituted span of the source text."""

    start: int
    end: int
    original: str
    replacement: str
    kind: str  # "synonym" | "entity"


@dataclass(frozen=True)
class AugmentAudit:
    """Replacements applied to one source instance, in span order."""

    instance_id: str
    replacements: tuple[Replacement, ...]


def apply_audit(text: str, audit: AugmentAudit) -> str:
    """Replay an audit against the source text it was recorded from."""
    return _splice(text, audit.replacements)


def _splice(text: str, replacements: Iterable[Replacement]) -> str:
    parts = []
    pos = 0
    for rep in sorted(replacements, key=lambda r: r.start):
        parts.append(text[pos : rep.start])
        parts.append(rep.replacement)
        pos = rep.end
    parts.append(text[pos:])
    return "".join(parts)


def _overlaps(start: int, end: int, spans: Iterable[tuple[int, int]]) -> bool:
    return any(start < e and s < end for s, e in spans)


def _span_allowed(start: int, end: int, inst: AspectInstance, protect_aspect: bool) -> bool:
    """A replacement must sit entirely before, after, or (only when the
    aspect is unprotected) inside the aspect span. Straddling a boundary
    would leave the span meaningless."""
    a, b = inst.aspect_start, inst.aspect_end
    if not (start < b and a < end):
        return True
    if protect_aspect:
        return False
    return a <= start and end <= b


def _synonym_decisions(
    inst: AspectInstance,
    lexicon: SynonymLexicon,
    rate: float,
    rng: SplitMix64,
    protect_aspect: bool,
) -> list[Replacement]:
    reps: list[Replacement] = []
    for tok in tokenize(inst.text):
        if tok.is_punct or not _span_allowed(tok.start, tok.end, inst, protect_aspect):
            continue
        syns = lexicon.synonyms_of(tok.surface)
        if not syns:
            continue
        if rng.random() < rate:
            choice = syns[rng.below(len(syns))]
            reps.append(Replacement(tok.start, tok.end, tok.surface, choice, "synonym"))
    return reps


def _entity_decisions(
    inst: AspectInstance,
    dictionary: EntityDictionary,
    rate: float,
    rng: SplitMix64,
    protect_aspect: bool,
    taken: list[Replacement],
) -> list[Replacement]:
    taken_spans = [(r.start, r.end) for r in taken]
    max_words = dictionary.max_surface_words()
    tokens = tokenize(inst.text)
    reps: list[Replacement] = []
    i = 0
    while i < len(tokens):
        match = None
        for n in range(min(max_words, len(tokens) - i), 0, -1):
            start, end = tokens[i].start, tokens[i + n - 1].end
            key = normalize(inst.text[start:end])
            tag = dictionary.entries.get(key)
            if tag is not None:
                match = (start, end, key, tag, n)
                break
        if match is None:
            i += 1
            continue
        start, end, key, tag, n = match
        i += n
        if not _span_allowed(start, end, inst, protect_aspect):
            continue
        if _overlaps(start, end, taken_spans):
            continue
        candidates = [s for s in dictionary.by_type[tag] if s != key]
        if not candidates:
            continue
        if rng.random() < rate:
            choice = candidates[rng.below(len(candidates))]
            reps.append(Replacement(start, end, inst.text[start:end], choice, "entity"))
    return reps


def _rebuild(inst: AspectInstance, reps: list[Replacement], new_id: str) -> AspectInstance:
    """Splice replacements into the text and recompute the aspect span.

    Decision functions guarantee every replacement lies entirely before,
    after, or inside the aspect span.
    """
    kept = sorted(reps, key=lambda r: r.start)
    new_text = _splice(inst.text, kept)
    shift = sum(
        len(r.replacement) - (r.end - r.start) for r in kept if r.end <= inst.aspect_start
    )
    inner = sum(
        len(r.replacement) - (r.end - r.start)
        for r in kept
        if inst.aspect_start <= r.start and r.end <= inst.aspect_end
    )
    new_start = inst.aspect_start + shift
    new_end = inst.aspect_end + shift + inner
    return AspectInstance(
        id=new_id,
        text=new_text,
        aspect_term=new_text[new_start:new_end],
        aspect_start=new_start,
        aspect_end=new_end,
        label=inst.label,
    )


def synonym_replace(
    inst: AspectInstance,
    lexicon: SynonymLexicon,
    rate: float,
    seed: int,
    protect_aspect: bool = True,
    new_id: Optional[str] = None,
) -> tuple[AspectInstance, AugmentAudit]:
    """Replace eligible tokens with a uniformly drawn synonym at ``rate``."""
    if not (0.0 <= rate <= 1.0):
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    rng = SplitMix64(seed)
    reps = _synonym_decisions(inst, lexicon, rate, rng, protect_aspect)
    out_id = new_id if new_id is not None else f"{inst.id}-syn"
    out = _rebuild(inst, reps, out_id)
    return out, AugmentAudit(inst.id, tuple(sorted(reps, key=lambda r: r.start)))


def entity_replace(
    inst: AspectInstance,
    dictionary: EntityDictionary,
    rate: float,
    seed: int,
    protect_aspect: bool = True,
    new_id: Optional[str] = None,
) -> tuple[AspectInstance, AugmentAudit]:
    """Longest-match entity mentions are swapped for a different surface of
    the same type; a type with a single surface is never replaced."""
    if not (0.0 <= rate <= 1.0):
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    rng = SplitMix64(seed)
    reps = _entity_decisions(inst, dictionary, rate, rng, protect_aspect, [])
    out_id = new_id if new_id is not None else f"{inst.id}-ent"
    out = _rebuild(inst, reps, out_id)
    return out, AugmentAudit(inst.id, tuple(sorted(reps, key=lambda r: r.start)))


def augment_instance(
    inst: AspectInstance,
    lexicon: Optional[SynonymLexicon],
    dictionary: Optional[EntityDictionary],
    cfg: AugmentConfig,
    seed: int,
    new_id: str,
) -> tuple[AspectInstance, AugmentAudit]:
    """One augmented variant: synonym pass, then entity pass over the spans
    the synonym pass left untouched, all in source-text coordinates."""
    rng = SplitMix64(seed)
    reps: list[Replacement] = []
    if lexicon is not None and len(lexicon) > 0:
        reps.extend(
            _synonym_decisions(inst, lexicon, cfg.synonym_rate, rng, cfg.protect_aspect)
        )
    if dictionary is not None and len(dictionary) > 0:
        reps.extend(
            _entity_decisions(
                inst, dictionary, cfg.entity_rate, rng, cfg.protect_aspect, reps
            )
        )
    out = _rebuild(inst, reps, new_id)
    return out, AugmentAudit(inst.id, tuple(sorted(reps, key=lambda r: r.start)))


def augment_dataset(
    dataset: Dataset,
    lexicon: Optional[SynonymLexicon],
    dictionary: Optional[EntityDictionary],
    cfg: AugmentConfig,
) -> tuple[Dataset, list[AugmentAudit]]:
    """All originals followed by ``cfg.copies`` variants per instance.

    Output size is ``len(dataset) * (1 + cfg.copies)``; every variant keeps
    its source label and satisfies the aspect-span invariant.
    """
    out: list[AspectInstance] = list(dataset)
    audits: list[AugmentAudit] = []
    for i, inst in enumerate(dataset):
        for c in range(1, cfg.copies + 1):
            variant, audit = augment_instance(
                inst, lexicon, dictionary, cfg, seed=cfg.seed ^ i ^ c,
                new_id=f"{inst.id}-aug{c}",
            )
            out.append(variant)
            audits.append(audit)
    return Dataset(out), audits


def write_audit_log(audits: Iterable[AugmentAudit], path: str | Path) -> None:
    """One JSON line per replacement: id, span, original, replacement, kind."""
    with open(path, "w", encoding="utf-8") as fh:
        for audit in audits:
            for r in audit.replacements:
                fh.write(
                    json.dumps(
                        {
                            "id": audit.instance_id,
                            "start": r.start,
                            "end": r.end,
                            "original": r.original,
                            "replacement": r.replacement,
                            "kind": r.kind,
                        },
                        ensure_ascii=False,
                    )
                )
                fh.write("\n")

"""Scoring backends.

A scorer turns (text, aspect term, aspect span) into three probabilities
(positive, neutral, negative) that sum to 1. Which backend runs is a
deployment decision; the default is a self-contained lexicon scorer so the
service works offline and deterministically out of the box. The input
windowing mode is part of the model_id so cached features stay traceable.
"""

from __future__ import annotations

import math
import os
from typing import Protocol

WINDOW_FULL = "full-marker"      # whole text with the aspect marked
WINDOW_ASPECT = "aspect-window"  # +/- a few tokens around the aspect

ASPECT_OPEN = "«"   # «
ASPECT_CLOSE = "»"  # »


class Scorer(Protocol):
    model_id: str

    def score(self, text: str, aspect_term: str, aspect_start: int, aspect_end: int
              ) -> tuple[float, float, float]:
        """Return (positive, neutral, negative), each in [0,1], summing to 1."""


def build_window(text: str, aspect_start: int, aspect_end: int, mode: str) -> str:
    """Render the scorer input for the configured windowing mode."""
    marked = (
        text[:aspect_start]
        + ASPECT_OPEN
        + text[aspect_start:aspect_end]
        + ASPECT_CLOSE
        + text[aspect_end:]
    )
    if mode == WINDOW_FULL:
        return marked
    # aspect window: the marked aspect plus up to 5 tokens on each side
    before = text[:aspect_start].split()
    after = text[aspect_end:].split()
    return " ".join(
        before[-5:] + [ASPECT_OPEN + text[aspect_start:aspect_end] + ASPECT_CLOSE] + after[:5]
    )


def _softmax(logits: tuple[float, float, float]) -> tuple[float, float, float]:
    peak = max(logits)
    exps = [math.exp(v - peak) for v in logits]
    total = sum(exps)
    return tuple(v / total for v in exps)


# Compact polar lexicons (Persian plus a little English). The service
# deliberately does not depend on the analysis toolkit, so the two
# character unifications it needs are inlined here.
_POSITIVE = {
    "خوب", "عالی", "مناسب", "مطلوب", "قشنگ", "زیبا", "راحت", "سریع", "محکم",
    "ارزان", "باکیفیت", "بی‌نظیر", "دوست‌داشتنی", "رضایت", "راضی",
    "good", "great", "fine", "excellent", "nice", "fast", "cheap",
}
_NEGATIVE = {
    "بد", "ضعیف", "افتضاح", "خراب", "نامناسب", "گران", "کند", "ایراد", "عیب",
    "مشکل", "ناراضی", "شکسته", "بی‌کیفیت",
    "bad", "poor", "terrible", "broken", "slow", "expensive",
}

_UNIFY = str.maketrans({"ي": "ی", "ك": "ک"})


def _fold(token: str) -> str:
    return token.translate(_UNIFY).casefold().strip(".,!?؛،؟\"'()«»")


class LexiconScorer:
    """Deterministic lexicon scorer: polar word hits become softmax logits."""

    def __init__(self, window: str = WINDOW_FULL):
        if window not in (WINDOW_FULL, WINDOW_ASPECT):
            raise ValueError(f"unknown window mode {window!r}")
        self.window = window
        self.model_id = f"fa-lexicon-v1|{window}"

    def score(self, text, aspect_term, aspect_start, aspect_end):
        window = build_window(text, aspect_start, aspect_end, self.window)
        pos = neg = 0
        for raw in window.split():
            token = _fold(raw)
            if token in _POSITIVE:
                pos += 1
            elif token in _NEGATIVE:
                neg += 1
        return _softmax((1.1 * pos, 0.5, 1.1 * neg))


class TransformersScorer:
    """3-class sequence-classification checkpoint behind the same contract.

    Loads lazily and heavily; only used when a checkpoint is configured.
    Inference runs in eval mode with gradients off, so identical requests
    give identical scores.
    """

    def __init__(self, checkpoint: str, window: str = WINDOW_FULL):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self.window = window
        self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self._model = AutoModelForSequenceClassification.from_pretrained(checkpoint)
        self._model.eval()
        if self._model.config.num_labels != 3:
            raise ValueError(
                f"{checkpoint}: expected 3 labels, got {self._model.config.num_labels}"
            )
        self._order = self._label_order(self._model.config.id2label)
        self.model_id = f"{os.path.basename(checkpoint.rstrip('/'))}|{window}"

    @staticmethod
    def _label_order(id2label: dict) -> tuple[int, int, int]:
        """Map model output indices to (positive, neutral, negative)."""
        wanted = {}
        for idx, name in id2label.items():
            key = str(name).casefold()
            for target in ("positive", "neutral", "negative"):
                if target in key:
                    wanted[target] = int(idx)
        if len(wanted) == 3:
            return wanted["positive"], wanted["neutral"], wanted["negative"]
        return 0, 1, 2  # fall back to index order

    def score(self, text, aspect_term, aspect_start, aspect_end):
        window = build_window(text, aspect_start, aspect_end, self.window)
        inputs = self._tokenizer(window, truncation=True, max_length=128,
                                 return_tensors="pt")
        with self._torch.no_grad():
            logits = self._model(**inputs).logits[0]
        probs = self._torch.softmax(logits, dim=-1).tolist()
        p, n, g = self._order
        return _softmax_renorm(probs[p], probs[n], probs[g])


def _softmax_renorm(p: float, n: float, g: float) -> tuple[float, float, float]:
    total = p + n + g
    return (p / total, n / total, g / total)


def load_scorer_from_env() -> Scorer:
    """Deployment configuration: POLARITY_MODEL selects the backend
    ("lexicon", the default, or a transformers checkpoint path/name);
    POLARITY_WINDOW selects the input windowing."""
    window = os.environ.get("POLARITY_WINDOW", WINDOW_FULL)
    model = os.environ.get("POLARITY_MODEL", "lexicon")
    if model == "lexicon":
        return LexiconScorer(window)
    return TransformersScorer(model, window)

"""Confusion matrices, the usual classification metrics, and the experiment
runner that ties loading, augmentation, features and the classifier together.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import classifier as clf
from . import features as feat
from .augment import AugmentConfig, augment_dataset
from .config import ExperimentConfig, validate_paths
from .corpus import Polarity, load_dataset, split
from .lexicon import load_entities, load_synonyms
from .preprocess import Stoplist, default_stoplist, feature_tokens, load_stoplist

REPORT_FORMAT = "pabsa-report"
REPORT_VERSION = 1

_LABELS = [p.to_string() for p in Polarity]


class ExperimentError(RuntimeError):
    """Pipeline failure, tagged with the stage it happened in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts; rows are true labels, columns predicted, encoding order."""

    counts: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if len(self.counts) != 3 or any(len(r) != 3 for r in self.counts):
            raise ValueError("confusion matrix must be 3x3")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("confusion matrix counts must be nonnegative")

    @property
    def total(self) -> int:
        return sum(sum(r) for r in self.counts)

    def row_sum(self, i: int) -> int:
        return sum(self.counts[i])

    def col_sum(self, j: int) -> int:
        return sum(self.counts[i][j] for i in range(3))

    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(3))


def confusion_matrix(y_true: Sequence, y_pred: Sequence) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if len(y_true) == 0:
        raise ValueError("cannot build a confusion matrix from zero instances")
    m = [[0, 0, 0] for _ in range(3)]
    for t, p in zip(y_true, y_pred):
        m[int(t)][int(p)] += 1
    return ConfusionMatrix(tuple(tuple(r) for r in m))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    per_class: tuple[ClassMetrics, ClassMetrics, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_f1: float
    config: Optional[dict] = None
    split_info: Optional[dict] = None
    layout: Optional[dict] = None

    def to_record(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "labels": _LABELS,
            "confusion": [list(r) for r in self.confusion.counts],
            "metrics": {
                "accuracy": self.accuracy,
                "per_class": {
                    _LABELS[i]: {
                        "precision": c.precision,
                        "recall": c.recall,
                        "f1": c.f1,
                        "support": c.support,
                    }
                    for i, c in enumerate(self.per_class)
                },
                "macro": {
                    "precision": self.macro_precision,
                    "recall": self.macro_recall,
                    "f1": self.macro_f1,
                },
                "weighted_f1": self.weighted_f1,
            },
            "config": self.config,
            "split": self.split_info,
            "feature_layout": self.layout,
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def metrics(m: ConfusionMatrix) -> EvalReport:
    """Per-class precision/recall/F1 with the 0/0 := 0 convention, macro
    averages, support-weighted F1, and accuracy.

    A class that appears in neither the true labels nor the predictions is
    left out of the macro averages; otherwise a perfect predictor on a
    2-class sample could never reach macro-F1 1.
    """
    if m.total == 0:
        raise ValueError("empty confusion matrix")
    per_class = []
    for c in range(3):
        tp = m.counts[c][c]
        precision = _safe_div(tp, m.col_sum(c))
        recall = _safe_div(tp, m.row_sum(c))
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class.append(ClassMetrics(precision, recall, f1, m.row_sum(c)))
    present = [c for c in range(3) if m.row_sum(c) > 0 or m.col_sum(c) > 0]
    return EvalReport(
        confusion=m,
        accuracy=m.trace() / m.total,
        per_class=tuple(per_class),
        macro_precision=sum(per_class[c].precision for c in present) / len(present),
        macro_recall=sum(per_class[c].recall for c in present) / len(present),
        macro_f1=sum(per_class[c].f1 for c in present) / len(present),
        weighted_f1=sum(c.f1 * c.support for c in per_class) / m.total,
    )


def _ids_digest(instances) -> str:
    blob = "\n".join(i.id for i in instances).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _load_stoplist_for(cfg: ExperimentConfig) -> Optional[Stoplist]:
    if not cfg.preprocess.use_stopwords:
        return None
    if cfg.preprocess.stopwords_path:
        return load_stoplist(cfg.preprocess.stopwords_path)
    return default_stoplist()


def build_providers(cfg: ExperimentConfig) -> list[feat.PolarityProvider]:
    providers: list[feat.PolarityProvider] = []
    for section in cfg.features.providers:
        if section.kind == "file":
            providers.append(feat.file_provider(section.path))
        else:
            providers.append(
                feat.remote_provider(
                    section.resolved_base_url(), section.model_id, section.timeout
                )
            )
    ids = [p.provider_id for p in providers]
    if len(set(ids)) != len(ids):
        raise feat.ProviderError(f"provider ids must be unique, got {ids}")
    return providers


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """Execute the full pipeline described by ``cfg``.

    Vocabulary is fitted on the training partition only; augmentation (when
    enabled) touches the training side unless ``train_only`` is off. With an
    ``out`` directory set, writes report.json, model.json, vocabulary.json
    and config.json; identical configs produce byte-identical files.
    """

    def run_stage(stage, fn):
        try:
            return fn()
        except Exception as e:  # noqa: BLE001 - re-tagged with stage context
            raise ExperimentError(stage, e) from e

    run_stage("config", lambda: validate_paths(cfg))
    dataset = run_stage("load", lambda: load_dataset(cfg.dataset))
    train, test = run_stage(
        "split",
        lambda: split(dataset, cfg.split.ratio, cfg.split.seed, cfg.split.granularity),
    )
    split_info = {
        "granularity": cfg.split.granularity,
        "ratio": cfg.split.ratio,
        "seed": cfg.split.seed,
        "train_size": len(train),
        "test_size": len(test),
        "train_ids_sha256": _ids_digest(train),
        "test_ids_sha256": _ids_digest(test),
    }

    if cfg.augment.enabled:
        def do_augment():
            lex = load_synonyms(cfg.augment.synonyms_path) if cfg.augment.synonyms_path else None
            ents = load_entities(cfg.augment.entities_path) if cfg.augment.entities_path else None
            acfg = AugmentConfig(
                synonym_rate=cfg.augment.synonym_rate,
                entity_rate=cfg.augment.entity_rate,
                seed=cfg.augment.seed,
                protect_aspect=cfg.augment.protect_aspect,
                copies=cfg.augment.copies,
            )
            new_train, _ = augment_dataset(train, lex, ents, acfg)
            new_test = test
            if not cfg.augment.train_only:
                new_test, _ = augment_dataset(test, lex, ents, acfg)
            return new_train, new_test

        train, test = run_stage("augment", do_augment)

    def do_features():
        stoplist = _load_stoplist_for(cfg)
        fc = feat.FeatureConfig(
            min_df=cfg.features.min_df,
            max_features=cfg.features.max_features,
            aspect_bag=cfg.features.aspect_bag,
            use_stemming=cfg.preprocess.stemming,
            use_stopwords=cfg.preprocess.use_stopwords,
        )
        docs = [
            feature_tokens(inst.text, stoplist, cfg.preprocess.stemming)
            for inst in train
        ]
        vocab = feat.fit_vocabulary(
            docs, fc.min_df, fc.max_features, use_stemming=fc.use_stemming
        )
        providers = build_providers(cfg)
        x_train = feat.build_matrix(train, vocab, providers, fc, stoplist)
        x_test = feat.build_matrix(test, vocab, providers, fc, stoplist)
        layout = feat.FeatureLayout(
            vocab_size=len(vocab),
            aspect_bag=fc.aspect_bag,
            provider_ids=tuple(p.provider_id for p in providers),
        )
        return vocab, layout, x_train, x_test

    vocab, layout, x_train, x_test = run_stage("features", do_features)

    def do_train():
        y_train = [int(inst.label) for inst in train]
        if cfg.classifier.kind == "tree":
            model = clf.fit_tree(x_train, y_train, cfg.classifier.tree)
        else:
            model = clf.fit_nb(x_train, y_train)
        return dataclasses.replace(model, layout_hash=layout.descriptor_hash())

    model = run_stage("train", do_train)

    def do_eval():
        if isinstance(model, clf.DecisionTree):
            y_pred = clf.predict_batch(model, x_test)
        else:
            y_pred = clf.predict_nb_batch(model, x_test)
        y_true = [int(inst.label) for inst in test]
        report = metrics(confusion_matrix(y_true, [int(p) for p in y_pred]))
        return dataclasses.replace(
            report,
            config=cfg.to_record(),
            split_info=split_info,
            layout=layout.to_record(),
        )

    report = run_stage("evaluate", do_eval)

    if cfg.out:
        def do_write():
            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            write_report(report, out / "report.json")
            clf.save_model(model, out / "model.json")
            _write_json(vocab.to_record(), out / "vocabulary.json")
            _write_json(cfg.to_record(), out / "config.json")

        run_stage("write", do_write)
    return report


def _write_json(record: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def write_report(report: EvalReport, path: str | Path) -> None:
    _write_json(report.to_record(), Path(path))


def load_report(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    if rec.get("format") != REPORT_FORMAT:
        raise ValueError(f"{path}: not a {REPORT_FORMAT} file")
    return rec


def render_comparison(reports: Sequence[tuple[str, dict]]) -> str:
    """Text table of (approach, accuracy %, macro and weighted F1 %),
    sorted by accuracy, best first."""
    rows = []
    for name, rec in reports:
        m = rec["metrics"]
        rows.append(
            (name, m["accuracy"] * 100, m["macro"]["f1"] * 100, m["weighted_f1"] * 100)
        )
    rows.sort(key=lambda r: -r[1])
    name_w = max(len("Approach"), *(len(r[0]) for r in rows))
    header = (
        f"{'Approach':<{name_w}}  {'Accuracy (%)':>12}  "
        f"{'Macro-F1 (%)':>12}  {'Weighted-F1 (%)':>15}"
    )
    lines = [header, "-" * len(header)]
    for name, acc, mf1, wf1 in rows:
        lines.append(f"{name:<{name_w}}  {acc:>12.2f}  {mf1:>12.2f}  {wf1:>15.2f}")
    return "\n".join(lines)

"""Experiment configuration: one JSON document drives the whole pipeline.

Relative paths inside a config file are resolved against the file's own
directory, so configs can live next to their data. Precedence everywhere is
flags > file > defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .classifier import TreeParams

POLARITY_URL_ENV = "PABSA_POLARITY_URL"


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class SplitSection:
    ratio: float = 0.8
    seed: int = 42
    granularity: str = "target"

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise ConfigError(f"split.ratio must be in (0, 1), got {self.ratio}")
        if self.granularity not in ("target", "comment"):
            raise ConfigError(f"split.granularity must be target|comment, got {self.granularity!r}")


@dataclass(frozen=True)
class PreprocessSection:
    stopwords_path: Optional[str] = None  # None -> packaged stoplist
    use_stopwords: bool = True
    stemming: bool = True


@dataclass(frozen=True)
class AugmentSection:
    enabled: bool = False
    synonym_rate: float = 0.1
    entity_rate: float = 0.1
    copies: int = 1
    seed: int = 42
    protect_aspect: bool = True
    train_only: bool = True
    synonyms_path: Optional[str] = None
    entities_path: Optional[str] = None


@dataclass(frozen=True)
class ProviderSection:
    kind: str  # "file" | "remote"
    path: Optional[str] = None        # file kind
    model_id: Optional[str] = None    # remote kind
    base_url: Optional[str] = None    # remote kind; default from PABSA_POLARITY_URL
    timeout: float = 10.0

    def __post_init__(self):
        if self.kind == "file":
            if not self.path:
                raise ConfigError("file provider needs a 'path'")
        elif self.kind == "remote":
            if not self.model_id:
                raise ConfigError("remote provider needs a 'model_id'")
        else:
            raise ConfigError(f"provider kind must be file|remote, got {self.kind!r}")

    def resolved_base_url(self) -> str:
        url = self.base_url or os.environ.get(POLARITY_URL_ENV)
        if not url:
            raise ConfigError(
                f"remote provider {self.model_id!r} has no base_url and "
                f"{POLARITY_URL_ENV} is not set"
            )
        return url


@dataclass(frozen=True)
class FeatureSection:
    min_df: int = 2
    max_features: Optional[int] = 20000
    aspect_bag: bool = True
    providers: tuple[ProviderSection, ...] = ()


@dataclass(frozen=True)
class ClassifierSection:
    kind: str = "tree"
    tree: TreeParams = field(default_factory=TreeParams)

    def __post_init__(self):
        if self.kind not in ("tree", "nb"):
            raise ConfigError(f"classifier.kind must be tree|nb, got {self.kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    name: str = "experiment"
    split: SplitSection = field(default_factory=SplitSection)
    preprocess: PreprocessSection = field(default_factory=PreprocessSection)
    augment: AugmentSection = field(default_factory=AugmentSection)
    features: FeatureSection = field(default_factory=FeatureSection)
    classifier: ClassifierSection = field(default_factory=ClassifierSection)
    out: Optional[str] = None

    def to_record(self) -> dict:
        """Provenance echo of the experiment identity.

        The output directory is deliberately not part of it: the same
        experiment written to two places must produce identical reports.
        """
        return {
            "dataset": self.dataset,
            "name": self.name,
            "split": {
                "ratio": self.split.ratio,
                "seed": self.split.seed,
                "granularity": self.split.granularity,
            },
            "preprocess": {
                "stopwords_path": self.preprocess.stopwords_path,
                "use_stopwords": self.preprocess.use_stopwords,
                "stemming": self.preprocess.stemming,
            },
            "augment": {
                "enabled": self.augment.enabled,
                "synonym_rate": self.augment.synonym_rate,
                "entity_rate": self.augment.entity_rate,
                "copies": self.augment.copies,
                "seed": self.augment.seed,
                "protect_aspect": self.augment.protect_aspect,
                "train_only": self.augment.train_only,
                "synonyms_path": self.augment.synonyms_path,
                "entities_path": self.augment.entities_path,
            },
            "features": {
                "min_df": self.features.min_df,
                "max_features": self.features.max_features,
                "aspect_bag": self.features.aspect_bag,
                "providers": [
                    {
                        "kind": p.kind,
                        "path": p.path,
                        "model_id": p.model_id,
                        "base_url": p.base_url,
                        "timeout": p.timeout,
                    }
                    for p in self.features.providers
                ],
            },
            "classifier": {
                "kind": self.classifier.kind,
                "tree": self.classifier.tree.to_record(),
            },
        }


def _resolve(base: Path, value: Optional[str]) -> Optional[str]:
    """Anchor a path to the config's directory, as an absolute path.

    Absolute so that a config echo saved into a run bundle keeps working
    from any working directory (predict re-reads it from there).
    """
    if value is None:
        return None
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    return str(p.resolve())


def config_from_record(rec: dict, base_dir: str | Path = ".") -> ExperimentConfig:
    """Build a config from a parsed JSON object, resolving relative paths."""
    base = Path(base_dir)
    if "dataset" not in rec:
        raise ConfigError("config needs a 'dataset' path")
    split_rec = rec.get("split", {})
    pre_rec = rec.get("preprocess", {})
    aug_rec = rec.get("augment", {})
    feat_rec = rec.get("features", {})
    clf_rec = rec.get("classifier", {})
    providers = tuple(
        ProviderSection(
            kind=p.get("kind", "file"),
            path=_resolve(base, p.get("path")),
            model_id=p.get("model_id"),
            base_url=p.get("base_url"),
            timeout=p.get("timeout", 10.0),
        )
        for p in feat_rec.get("providers", [])
    )
    tree_rec = clf_rec.get("tree", {})
    return ExperimentConfig(
        dataset=_resolve(base, rec["dataset"]),
        name=rec.get("name", "experiment"),
        split=SplitSection(
            ratio=split_rec.get("ratio", 0.8),
            seed=split_rec.get("seed", 42),
            granularity=split_rec.get("granularity", "target"),
        ),
        preprocess=PreprocessSection(
            stopwords_path=_resolve(base, pre_rec.get("stopwords_path")),
            use_stopwords=pre_rec.get("use_stopwords", True),
            stemming=pre_rec.get("stemming", True),
        ),
        augment=AugmentSection(
            enabled=aug_rec.get("enabled", False),
            synonym_rate=aug_rec.get("synonym_rate", 0.1),
            entity_rate=aug_rec.get("entity_rate", 0.1),
            copies=aug_rec.get("copies", 1),
            seed=aug_rec.get("seed", 42),
            protect_aspect=aug_rec.get("protect_aspect", True),
            train_only=aug_rec.get("train_only", True),
            synonyms_path=_resolve(base, aug_rec.get("synonyms_path")),
            entities_path=_resolve(base, aug_rec.get("entities_path")),
        ),
        features=FeatureSection(
            min_df=feat_rec.get("min_df", 2),
            max_features=feat_rec.get("max_features", 20000),
            aspect_bag=feat_rec.get("aspect_bag", True),
            providers=providers,
        ),
        classifier=ClassifierSection(
            kind=clf_rec.get("kind", "tree"),
            tree=TreeParams(
                max_depth=tree_rec.get("max_depth"),
                min_samples_split=tree_rec.get("min_samples_split", 2),
                min_samples_leaf=tree_rec.get("min_samples_leaf", 1),
                min_impurity_decrease=tree_rec.get("min_impurity_decrease", 0.0),
            ),
        ),
        out=_resolve(base, rec.get("out")),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            rec = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from None
    cfg = config_from_record(rec, base_dir=path.parent)
    if rec.get("name") is None:
        cfg = replace(cfg, name=path.stem)
    return cfg


def validate_paths(cfg: ExperimentConfig) -> None:
    """Check that every referenced file exists before work starts."""
    missing = []
    if not Path(cfg.dataset).is_file():
        missing.append(("dataset", cfg.dataset))
    if cfg.preprocess.stopwords_path and not Path(cfg.preprocess.stopwords_path).is_file():
        missing.append(("preprocess.stopwords_path", cfg.preprocess.stopwords_path))
    if cfg.augment.enabled:
        for label, p in (
            ("augment.synonyms_path", cfg.augment.synonyms_path),
            ("augment.entities_path", cfg.augment.entities_path),
        ):
            if p and not Path(p).is_file():
                missing.append((label, p))
    for i, p in enumerate(cfg.features.providers):
        if p.kind == "file" and not Path(p.path).is_file():
            missing.append((f"features.providers[{i}].path", p.path))
    if missing:
        lines = ", ".join(f"{label}: {p}" for label, p in missing)
        raise ConfigError(f"missing files: {lines}")

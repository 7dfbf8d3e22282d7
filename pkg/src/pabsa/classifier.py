"""From-scratch CART decision tree and a multinomial Naive Bayes baseline.

Tree induction is deliberately pure Python: split choice is part of the
external contract (exact thresholds, exact tie-breaks), so arithmetic must
not depend on a library's evaluation order. Tie rules, everywhere:

* candidate splits: higher impurity decrease wins; equal decreases keep the
  lower feature index, then the lower threshold;
* leaf labels: majority class, equal counts keep the lowest label encoding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .corpus import Polarity

MODEL_FORMAT = "pabsa-model"
MODEL_VERSION = 1

N_CLASSES = 3


class ModelError(ValueError):
    """Corrupt model file or incompatible inputs."""


class ModelVersionError(ModelError):
    """Model file written by an unknown format version."""


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    min_impurity_decrease: float = 0.0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_impurity_decrease < 0:
            raise ValueError("min_impurity_decrease must be >= 0")

    def to_record(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "min_impurity_decrease": self.min_impurity_decrease,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TreeParams":
        return cls(**rec)


@dataclass(frozen=True)
class SplitNode:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class LeafNode:
    counts: tuple[int, int, int]
    label: Polarity


@dataclass(frozen=True)
class DecisionTree:
    """Fitted CART model; node 0 is the root, values <= threshold go left."""

    nodes: tuple[Union[SplitNode, LeafNode], ...]
    params: TreeParams
    n_features: int
    layout_hash: Optional[str] = None

    def depth(self) -> int:
        def walk(i: int) -> int:
            node = self.nodes[i]
            if isinstance(node, LeafNode):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)

    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if isinstance(n, LeafNode))


def gini(class_counts: Sequence[int]) -> float:
    """Gini impurity 1 - sum((c/n)^2); in [0, 2/3] for three classes."""
    n = sum(class_counts)
    if n == 0:
        raise ValueError("gini of all-zero counts is undefined")
    return 1.0 - sum((c / n) ** 2 for c in class_counts)


@dataclass(frozen=True)
class SplitChoice:
    feature: int
    threshold: float
    decrease: float


def _class_counts(y: Sequence[int], idx: Sequence[int]) -> list[int]:
    counts = [0] * N_CLASSES
    for i in idx:
        counts[y[i]] += 1
    return counts


def best_split(
    X: Sequence[Sequence[float]],
    y: Sequence[int],
    feature_subset: Optional[Sequence[int]] = None,
    min_samples_leaf: int = 1,
    min_impurity_decrease: float = 0.0,
    sample_idx: Optional[Sequence[int]] = None,
) -> Optional[SplitChoice]:
    """Exhaustive split search over midpoint thresholds.

    Candidates sit halfway between consecutive distinct sorted values of a
    feature. Returns None when nothing decreases impurity by more than
    ``min_impurity_decrease``.
    """
    idx = list(sample_idx) if sample_idx is not None else list(range(len(y)))
    n = len(idx)
    if n < 2:
        return None
    features = feature_subset if feature_subset is not None else range(len(X[idx[0]]))
    parent_counts = _class_counts(y, idx)
    parent_gini = gini(parent_counts)
    best: Optional[SplitChoice] = None
    for f in features:
        order = sorted(idx, key=lambda i: X[i][f])
        left_counts = [0] * N_CLASSES
        right_counts = parent_counts[:]
        for k in range(n - 1):
            i = order[k]
            left_counts[y[i]] += 1
            right_counts[y[i]] -= 1
            v, v_next = X[i][f], X[order[k + 1]][f]
            if v == v_next:
                continue
            threshold = (v + v_next) / 2.0
            # Guard against midpoints that round up to the right value and
            # would misroute it; such candidates cannot separate the pair.
            if threshold == v_next:
                continue
            n_left = k + 1
            n_right = n - n_left
            if n_left < min_samples_leaf or n_right < min_samples_leaf:
                continue
            # parent - (wl*gl + wr*gr): the parenthesized shape is part of
            # the split-choice contract, exact ties depend on it
            weighted = (n_left / n) * gini(left_counts) + (n_right / n) * gini(
                right_counts
            )
            decrease = parent_gini - weighted
            if decrease > min_impurity_decrease and (
                best is None or decrease > best.decrease
            ):
                best = SplitChoice(f, threshold, decrease)
    return best


def _majority_label(counts: Sequence[int]) -> Polarity:
    best = 0
    for c in range(1, N_CLASSES):
        if counts[c] > counts[best]:
            best = c
    return Polarity(best)


def _as_float_rows(X) -> list[list[float]]:
    rows = [[float(v) for v in row] for row in X]
    for r, row in enumerate(rows):
        for v in row:
            if not math.isfinite(v):
                raise ValueError(f"non-finite feature value in row {r}")
    return rows


def _as_labels(y) -> list[int]:
    labels = [int(v) for v in y]
    for v in labels:
        if not (0 <= v < N_CLASSES):
            raise ValueError(f"label {v} outside the 3-class encoding")
    return labels


def fit_tree(X, y, params: TreeParams = TreeParams()) -> DecisionTree:
    """Greedy recursive induction. Deterministic: no randomness anywhere."""
    rows = _as_float_rows(X)
    labels = _as_labels(y)
    if len(rows) == 0:
        raise ValueError("cannot fit a tree on zero samples")
    if len(rows) != len(labels):
        raise ValueError(f"{len(rows)} rows but {len(labels)} labels")
    n_features = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != n_features:
            raise ValueError(f"row {r} has {len(row)} features, expected {n_features}")

    nodes: list[Union[SplitNode, LeafNode]] = []

    def build(idx: list[int], depth: int) -> int:
        counts = _class_counts(labels, idx)
        me = len(nodes)
        nodes.append(None)  # placeholder, patched below
        pure = max(counts) == len(idx)
        depth_capped = params.max_depth is not None and depth >= params.max_depth
        choice = None
        if not pure and not depth_capped and len(idx) >= params.min_samples_split:
            choice = best_split(
                rows,
                labels,
                min_samples_leaf=params.min_samples_leaf,
                min_impurity_decrease=params.min_impurity_decrease,
                sample_idx=idx,
            )
        if choice is None:
            nodes[me] = LeafNode(tuple(counts), _majority_label(counts))
            return me
        left_idx = [i for i in idx if rows[i][choice.feature] <= choice.threshold]
        right_idx = [i for i in idx if rows[i][choice.feature] > choice.threshold]
        left = build(left_idx, depth + 1)
        right = build(right_idx, depth + 1)
        nodes[me] = SplitNode(choice.feature, choice.threshold, left, right)
        return me

    build(list(range(len(rows))), 0)
    return DecisionTree(tuple(nodes), params, n_features)


def _row_of(x, n_features: int):
    if hasattr(x, "to_dense"):
        x = x.to_dense()
    if len(x) != n_features:
        raise ValueError(f"input has {len(x)} features, model expects {n_features}")
    return x


def predict(model: DecisionTree, x) -> Polarity:
    row = _row_of(x, model.n_features)
    i = 0
    while True:
        node = model.nodes[i]
        if isinstance(node, LeafNode):
            return node.label
        i = node.left if row[node.feature] <= node.threshold else node.right


def predict_batch(model: DecisionTree, X) -> list[Polarity]:
    return [predict(model, row) for row in X]


@dataclass(frozen=True)
class NaiveBayesModel:
    """Multinomial NB with Laplace smoothing (alpha = 1)."""

    log_priors: tuple[float, float, float]
    log_likelihoods: tuple[tuple[float, ...], ...]  # [class][feature]
    n_features: int
    layout_hash: Optional[str] = None


def fit_nb(X, y) -> NaiveBayesModel:
    Xa = np.asarray(X, dtype=np.float64)
    labels = _as_labels(y)
    if Xa.ndim != 2 or Xa.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D count matrix")
    if Xa.shape[0] != len(labels):
        raise ValueError(f"{Xa.shape[0]} rows but {len(labels)} labels")
    if (Xa < 0).any():
        raise ValueError("multinomial NB needs nonnegative feature values")
    n, d = Xa.shape
    log_priors = []
    log_liks = []
    for c in range(N_CLASSES):
        mask = np.asarray([lbl == c for lbl in labels])
        n_c = int(mask.sum())
        log_priors.append(math.log(n_c / n) if n_c else -math.inf)
        feature_sums = Xa[mask].sum(axis=0) if n_c else np.zeros(d)
        smoothed = feature_sums + 1.0
        log_liks.append(tuple(np.log(smoothed / smoothed.sum()).tolist()))
    return NaiveBayesModel(tuple(log_priors), tuple(log_liks), d)


def predict_nb(model: NaiveBayesModel, x) -> Polarity:
    row = np.asarray(_row_of(x, model.n_features), dtype=np.float64)
    if (row < 0).any():
        raise ValueError("multinomial NB needs nonnegative feature values")
    best, best_score = 0, -math.inf
    for c in range(N_CLASSES):
        prior = model.log_priors[c]
        if prior == -math.inf:
            continue
        score = prior + float(row @ np.asarray(model.log_likelihoods[c]))
        if score > best_score:
            best, best_score = c, score
    return Polarity(best)


def predict_nb_batch(model: NaiveBayesModel, X) -> list[Polarity]:
    return [predict_nb(model, row) for row in X]


def save_model(model: Union[DecisionTree, NaiveBayesModel], path: str | Path) -> None:
    if isinstance(model, DecisionTree):
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": "tree",
            "params": model.params.to_record(),
            "n_features": model.n_features,
            "layout_hash": model.layout_hash,
            "nodes": [
                {
                    "type": "split",
                    "feature": n.feature,
                    "threshold": n.threshold,
                    "left": n.left,
                    "right": n.right,
                }
                if isinstance(n, SplitNode)
                else {"type": "leaf", "counts": list(n.counts), "label": int(n.label)}
                for n in model.nodes
            ],
        }
    elif isinstance(model, NaiveBayesModel):
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": "nb",
            "n_features": model.n_features,
            "layout_hash": model.layout_hash,
            "log_priors": list(model.log_priors),
            "log_likelihoods": [list(row) for row in model.log_likelihoods],
        }
    else:
        raise ModelError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")


def load_model(path: str | Path) -> Union[DecisionTree, NaiveBayesModel]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelError(f"{path}: corrupt model file ({e})") from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelError(f"{path}: not a {MODEL_FORMAT} file")
    version = payload.get("version")
    if version != MODEL_VERSION:
        raise ModelVersionError(
            f"{path}: format version {version!r} not supported (expected {MODEL_VERSION})"
        )
    try:
        kind = payload["kind"]
        if kind == "tree":
            nodes: list[Union[SplitNode, LeafNode]] = []
            for rec in payload["nodes"]:
                if rec["type"] == "split":
                    nodes.append(
                        SplitNode(rec["feature"], rec["threshold"], rec["left"], rec["right"])
                    )
                elif rec["type"] == "leaf":
                    nodes.append(LeafNode(tuple(rec["counts"]), Polarity(rec["label"])))
                else:
                    raise ModelError(f"unknown node type {rec['type']!r}")
            return DecisionTree(
                tuple(nodes),
                TreeParams.from_record(payload["params"]),
                payload["n_features"],
                payload.get("layout_hash"),
            )
        if kind == "nb":
            return NaiveBayesModel(
                tuple(payload["log_priors"]),
                tuple(tuple(row) for row in payload["log_likelihoods"]),
                payload["n_features"],
                payload.get("layout_hash"),
            )
        raise ModelError(f"unknown model kind {kind!r}")
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ModelError):
            raise
        raise ModelError(f"{path}: corrupt model file ({e})") from None

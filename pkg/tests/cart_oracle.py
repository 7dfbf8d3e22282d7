"""Brute-force CART oracle, written independently of the package tree code.

Everything is recomputed from scratch at every candidate threshold: no
incremental counting, no prefix sums. Slow on purpose; it only has to agree
with the real implementation on small inputs.
"""

from dataclasses import dataclass
from typing import Optional, Union


@dataclass(frozen=True)
class OracleLeaf:
    counts: tuple
    label: int


@dataclass(frozen=True)
class OracleSplit:
    feature: int
    threshold: float
    left: "OracleNode"
    right: "OracleNode"


OracleNode = Union[OracleLeaf, OracleSplit]


def _gini_of(labels):
    n = len(labels)
    counts = [labels.count(c) for c in range(3)]
    return 1.0 - sum((c / n) ** 2 for c in counts), counts


def oracle_best_split(rows, labels, min_samples_leaf=1, min_impurity_decrease=0.0):
    """Try every (feature, midpoint) pair directly; keep the first maximum."""
    n = len(rows)
    if n < 2:
        return None
    parent_gini, _ = _gini_of(labels)
    best = None  # (decrease, feature, threshold)
    n_features = len(rows[0])
    for f in range(n_features):
        values = sorted(set(r[f] for r in rows))
        for a, b in zip(values, values[1:]):
            threshold = (a + b) / 2.0
            if threshold == b:
                continue  # midpoint indistinguishable from the right value
            left = [labels[i] for i in range(n) if rows[i][f] <= threshold]
            right = [labels[i] for i in range(n) if rows[i][f] > threshold]
            if len(left) < min_samples_leaf or len(right) < min_samples_leaf:
                continue
            gl, _ = _gini_of(left)
            gr, _ = _gini_of(right)
            # decrease = parent - (weighted child impurity); the parenthesized
            # shape is part of the pinned contract, exact ties depend on it
            decrease = parent_gini - ((len(left) / n) * gl + (len(right) / n) * gr)
            if decrease > min_impurity_decrease and (best is None or decrease > best[0]):
                best = (decrease, f, threshold)
    if best is None:
        return None
    return best[1], best[2], best[0]


def oracle_fit(rows, labels, max_depth=None, min_samples_split=2,
               min_samples_leaf=1, min_impurity_decrease=0.0, depth=0) -> OracleNode:
    counts = tuple(labels.count(c) for c in range(3))
    label = 0
    for c in (1, 2):
        if counts[c] > counts[label]:
            label = c
    stop = (
        max(counts) == len(labels)
        or (max_depth is not None and depth >= max_depth)
        or len(labels) < min_samples_split
    )
    choice = None
    if not stop:
        choice = oracle_best_split(rows, labels, min_samples_leaf, min_impurity_decrease)
    if choice is None:
        return OracleLeaf(counts, label)
    f, threshold, _ = choice
    left_rows, left_labels, right_rows, right_labels = [], [], [], []
    for row, lbl in zip(rows, labels):
        if row[f] <= threshold:
            left_rows.append(row)
            left_labels.append(lbl)
        else:
            right_rows.append(row)
            right_labels.append(lbl)
    return OracleSplit(
        f,
        threshold,
        oracle_fit(left_rows, left_labels, max_depth, min_samples_split,
                   min_samples_leaf, min_impurity_decrease, depth + 1),
        oracle_fit(right_rows, right_labels, max_depth, min_samples_split,
                   min_samples_leaf, min_impurity_decrease, depth + 1),
    )


def trees_equal(tree, node_index, oracle_node) -> bool:
    """Structural comparison of a fitted DecisionTree against the oracle."""
    from pabsa.classifier import LeafNode, SplitNode

    node = tree.nodes[node_index]
    if isinstance(node, LeafNode):
        return (
            isinstance(oracle_node, OracleLeaf)
            and node.counts == oracle_node.counts
            and int(node.label) == oracle_node.label
        )
    assert isinstance(node, SplitNode)
    return (
        isinstance(oracle_node, OracleSplit)
        and node.feature == oracle_node.feature
        and node.threshold == oracle_node.threshold
        and trees_equal(tree, node.left, oracle_node.left)
        and trees_equal(tree, node.right, oracle_node.right)
    )

#!/usr/bin/env python3
"""
CART decision tree with Gini impurity and deterministic split selection

Ties between candidate splits (scores within TIE_TOLERANCE) go to the lowest
feature index, then to the lowest threshold.
"""

from typing import Any, NamedTuple

import numpy as np

from .base import FeatureMatrix, LabelVector, TrainedModel, as_feature_matrix, as_label_vector, check_training_data

DEFAULT_MAX_DEPTH = 16
DEFAULT_MIN_LEAF = 1
TIE_TOLERANCE = 1e-12
LEAF = -1


class Split(NamedTuple):
    impurity: float
    feature: int
    threshold: float


class DecisionTree(TrainedModel):
    """Flat array tree; leaves have feature == -1 and carry a class index"""

    kind = "decision_tree"

    def __init__(
        self,
        class_set: np.ndarray,
        n_features: int,
        feature: np.ndarray,
        threshold: np.ndarray,
        left: np.ndarray,
        right: np.ndarray,
        value: np.ndarray,
    ):
        super().__init__(class_set, n_features)
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value

    @property
    def depth(self) -> int:
        depths = {0: 0}
        for node in range(len(self.feature)):
            if self.feature[node] != LEAF:
                depths[int(self.left[node])] = depths[node] + 1
                depths[int(self.right[node])] = depths[node] + 1
        return max(depths.values())

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def _predict_indices(self, X: np.ndarray) -> np.ndarray:
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[nodes] != LEAF
        while active.any():
            current = nodes[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[nodes] != LEAF
        return self.value[nodes]

    def state(self) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
        return {}, {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }

    @classmethod
    def from_state(
        cls, class_set: np.ndarray, n_features: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]
    ) -> "DecisionTree":
        return cls(
            class_set, n_features, arrays["feature"], arrays["threshold"], arrays["left"], arrays["right"], arrays["value"]
        )


def gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def best_split(X: np.ndarray, y_idx: np.ndarray, n_classes: int, min_leaf: int) -> Split | None:
    """Lowest weighted Gini over all axis-aligned midpoint thresholds"""
    n = X.shape[0]
    if n < 2 * min_leaf:
        return None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx] = 1.0
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left

    best: Split | None = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        left_counts = np.cumsum(onehot[order], axis=0)[:-1]
        right_counts = left_counts[-1] + onehot[order[-1]] - left_counts if n > 1 else left_counts
        valid = (xs[1:] != xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        impurity = (
            n_left * (1.0 - (left_counts**2).sum(axis=1) / n_left**2)
            + n_right * (1.0 - (right_counts**2).sum(axis=1) / n_right**2)
        ) / n
        impurity = np.where(valid, impurity, np.inf)
        pos = int(np.flatnonzero(impurity <= impurity.min() + TIE_TOLERANCE)[0])
        if best is None or impurity[pos] < best.impurity - TIE_TOLERANCE:
            threshold = (xs[pos] + xs[pos + 1]) / 2.0
            if threshold >= xs[pos + 1]:
                threshold = float(xs[pos])
            best = Split(float(impurity[pos]), f, float(threshold))
    return best


def train_decision_tree(
    X: FeatureMatrix | np.ndarray,
    y: LabelVector | np.ndarray,
    max_depth: int = DEFAULT_MAX_DEPTH,
    min_leaf: int = DEFAULT_MIN_LEAF,
) -> DecisionTree:
    """Grow a CART tree; leaves predict their majority class (smaller label on ties)"""
    X, y = as_feature_matrix(X), as_label_vector(y)
    check_training_data(X, y, min_classes=1)
    if max_depth < 0 or min_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_leaf >= 1")

    class_set = y.class_set
    y_idx = y.indices(class_set)
    n_classes = len(class_set)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[int] = []

    def new_node(rows: np.ndarray) -> int:
        counts = np.bincount(y_idx[rows], minlength=n_classes)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(int(np.argmax(counts)))
        return len(feature) - 1

    stack = [(new_node(np.arange(X.rows)), np.arange(X.rows), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= max_depth or len(np.unique(y_idx[rows])) < 2:
            continue
        split = best_split(X.values[rows], y_idx[rows], n_classes, min_leaf)
        if split is None:
            continue
        goes_left = X.values[rows, split.feature] <= split.threshold
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    tree = DecisionTree(
        class_set,
        X.cols,
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.int64),
    )
    tree.logger.debug(f"Grew tree with {len(feature)} nodes, depth {tree.depth}")
    return tree

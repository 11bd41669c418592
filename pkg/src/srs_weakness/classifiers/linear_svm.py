#!/usr/bin/env python3
"""
One-vs-rest linear SVM trained with Pegasos-style stochastic subgradient descent
"""

from typing import Any

import numpy as np

from .base import FeatureMatrix, LabelVector, TrainedModel, as_feature_matrix, as_label_vector, check_training_data, standardize_fit

DEFAULT_EPOCHS = 50
DEFAULT_LAMBDA = 1e-4


class LinearSvm(TrainedModel):
    """Weights act on standardized features with a trailing constant bias column"""

    kind = "linear_svm"

    def __init__(self, class_set: np.ndarray, weights: np.ndarray, mean: np.ndarray, scale: np.ndarray):
        super().__init__(class_set, mean.shape[0])
        self.weights = weights
        self.mean = mean
        self.scale = scale

    def _augment(self, X: np.ndarray) -> np.ndarray:
        Z = (X - self.mean) / self.scale
        return np.hstack([Z, np.ones((Z.shape[0], 1))])

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self._augment(X) @ self.weights.T)

    def _predict_indices(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def state(self) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
        return {}, {"weights": self.weights, "mean": self.mean, "scale": self.scale}

    @classmethod
    def from_state(
        cls, class_set: np.ndarray, n_features: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]
    ) -> "LinearSvm":
        return cls(class_set, arrays["weights"], arrays["mean"], arrays["scale"])


def train_linear_svm(
    X: FeatureMatrix | np.ndarray,
    y: LabelVector | np.ndarray,
    epochs: int = DEFAULT_EPOCHS,
    lam: float = DEFAULT_LAMBDA,
    seed: int = 0,
) -> LinearSvm:
    """Hinge loss + L2, step 1/(lambda*t), one binary problem per class sharing the sample order"""
    X, y = as_feature_matrix(X), as_label_vector(y)
    check_training_data(X, y)
    if epochs < 1 or lam <= 0:
        raise ValueError("epochs must be >= 1 and lambda > 0")

    class_set = y.class_set
    mean, scale = standardize_fit(X.values)
    model = LinearSvm(class_set, np.zeros((len(class_set), X.cols + 1)), mean, scale)
    Z = model._augment(X.values)
    signs = np.where(y.labels[:, None] == class_set[None, :], 1.0, -1.0)

    rng = np.random.default_rng(seed)
    W = model.weights
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(X.rows):
            t += 1
            eta = 1.0 / (lam * t)
            z = Z[i]
            violated = signs[i] * (W @ z) < 1.0
            W *= 1.0 - 1.0 / t
            if violated.any():
                W[violated] += eta * signs[i, violated, None] * z[None, :]

    model.logger.debug(f"Trained {len(class_set)} one-vs-rest SVMs over {t} steps")
    return model

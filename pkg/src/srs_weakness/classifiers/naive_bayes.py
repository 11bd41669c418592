#!/usr/bin/env python3
"""
Gaussian and Multinomial naive Bayes
"""

from typing import Any

import numpy as np

from ..errors import NegativeOrNonCountFeaturesError
from .base import (
    FeatureKind,
    FeatureMatrix,
    LabelVector,
    TrainedModel,
    as_feature_matrix,
    as_label_vector,
    check_training_data,
    first_top_indices,
)

VAR_SMOOTHING = 1e-9
LAPLACE_ALPHA = 1.0


class GaussianNaiveBayes(TrainedModel):
    kind = "gaussian_nb"

    def __init__(self, class_set: np.ndarray, log_prior: np.ndarray, theta: np.ndarray, var: np.ndarray):
        super().__init__(class_set, theta.shape[1])
        self.log_prior = log_prior
        self.theta = theta
        self.var = var

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        norm = -0.5 * np.log(2.0 * np.pi * self.var).sum(axis=1)
        sq = ((X[:, None, :] - self.theta[None, :, :]) ** 2 / self.var[None, :, :]).sum(axis=2)
        return np.asarray(self.log_prior + norm - 0.5 * sq)

    def _predict_indices(self, X: np.ndarray) -> np.ndarray:
        return first_top_indices(self.joint_log_likelihood(X))

    def state(self) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
        return {}, {"log_prior": self.log_prior, "theta": self.theta, "var": self.var}

    @classmethod
    def from_state(
        cls, class_set: np.ndarray, n_features: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]
    ) -> "GaussianNaiveBayes":
        return cls(class_set, arrays["log_prior"], arrays["theta"], arrays["var"])


class MultinomialNaiveBayes(TrainedModel):
    kind = "multinomial_nb"

    def __init__(self, class_set: np.ndarray, log_prior: np.ndarray, feature_log_prob: np.ndarray):
        super().__init__(class_set, feature_log_prob.shape[1])
        self.log_prior = log_prior
        self.feature_log_prob = feature_log_prob

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X @ self.feature_log_prob.T + self.log_prior)

    def _predict_indices(self, X: np.ndarray) -> np.ndarray:
        return first_top_indices(self.joint_log_likelihood(X))

    def state(self) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
        return {}, {"log_prior": self.log_prior, "feature_log_prob": self.feature_log_prob}

    @classmethod
    def from_state(
        cls, class_set: np.ndarray, n_features: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]
    ) -> "MultinomialNaiveBayes":
        return cls(class_set, arrays["log_prior"], arrays["feature_log_prob"])


def _class_priors(indices: np.ndarray, n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(indices, minlength=n_classes).astype(np.float64)
    return counts, np.log(counts / counts.sum())


def train_gaussian_nb(X: FeatureMatrix | np.ndarray, y: LabelVector | np.ndarray) -> GaussianNaiveBayes:
    """Per-class feature means and smoothed variances"""
    X, y = as_feature_matrix(X), as_label_vector(y)
    check_training_data(X, y)

    class_set = y.class_set
    indices = y.indices(class_set)
    _, log_prior = _class_priors(indices, len(class_set))

    epsilon = VAR_SMOOTHING * float(X.values.var(axis=0).max())
    if epsilon == 0.0:
        epsilon = VAR_SMOOTHING

    theta = np.zeros((len(class_set), X.cols))
    var = np.zeros((len(class_set), X.cols))
    for c in range(len(class_set)):
        members = X.values[indices == c]
        theta[c] = members.mean(axis=0)
        var[c] = members.var(axis=0) + epsilon
    return GaussianNaiveBayes(class_set, log_prior, theta, var)


def check_count_features(X: FeatureMatrix) -> None:
    """Multinomial NB only accepts nonnegative integer counts"""
    if X.kind is not FeatureKind.COUNTS:
        raise NegativeOrNonCountFeaturesError(
            f"multinomial naive Bayes needs term counts, got {X.kind.value} features"
        )
    if np.any(X.values < 0) or np.any(X.values != np.floor(X.values)):
        raise NegativeOrNonCountFeaturesError("multinomial naive Bayes needs nonnegative integer counts")


def train_multinomial_nb(X: FeatureMatrix | np.ndarray, y: LabelVector | np.ndarray) -> MultinomialNaiveBayes:
    """Laplace-smoothed per-class term log-probabilities"""
    X, y = as_feature_matrix(X), as_label_vector(y)
    check_count_features(X)
    check_training_data(X, y)

    class_set = y.class_set
    indices = y.indices(class_set)
    _, log_prior = _class_priors(indices, len(class_set))

    feature_count = np.zeros((len(class_set), X.cols))
    np.add.at(feature_count, indices, X.values)
    smoothed = feature_count + LAPLACE_ALPHA
    feature_log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    return MultinomialNaiveBayes(class_set, log_prior, feature_log_prob)

#!/usr/bin/env python3
"""
Feedforward neural network classifier
ReLU hidden layers, softmax output, cross-entropy loss, minibatch SGD with momentum
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import InvariantViolationError
from .base import FeatureMatrix, LabelVector, TrainedModel, as_feature_matrix, as_label_vector, check_training_data, standardize_fit


class MlpConfig(BaseModel):
    """Network shape and optimizer settings; defaults are batch 32 for 10 epochs"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    batch_size: int = Field(default=32, ge=1)
    epochs: int = Field(default=10, ge=1)
    hidden_sizes: tuple[int, ...] = Field(default=(128,))
    learning_rate: float = Field(default=0.01, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    seed: int = 0


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    return np.asarray(exps / exps.sum(axis=1, keepdims=True))


def forward(weights: list[np.ndarray], biases: list[np.ndarray], X: np.ndarray) -> list[np.ndarray]:
    """Activations of every layer, input first, softmax probabilities last"""
    activations = [X]
    for layer, (W, b) in enumerate(zip(weights, biases, strict=True)):
        z = activations[-1] @ W + b
        activations.append(softmax(z) if layer == len(weights) - 1 else relu(z))
    return activations


def mlp_loss_and_gradients(
    weights: list[np.ndarray], biases: list[np.ndarray], X: np.ndarray, targets: np.ndarray
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean cross-entropy over the batch and its gradient for every weight and bias

    targets is the one-hot matrix of the batch labels.
    """
    activations = forward(weights, biases, X)
    probs = activations[-1]
    n = X.shape[0]
    loss = float(-np.sum(targets * np.log(np.clip(probs, 1e-300, None))) / n)

    grad_w: list[np.ndarray] = [np.empty(0)] * len(weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(biases)
    delta = (probs - targets) / n
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (activations[layer] > 0)
    return loss, grad_w, grad_b


class MultilayerPerceptron(TrainedModel):
    kind = "mlp"

    def __init__(
        self,
        class_set: np.ndarray,
        weights: list[np.ndarray],
        biases: list[np.ndarray],
        mean: np.ndarray,
        scale: np.ndarray,
        config: MlpConfig,
        loss_history: list[float] | None = None,
    ):
        super().__init__(class_set, mean.shape[0])
        self.weights = weights
        self.biases = biases
        self.mean = mean
        self.scale = scale
        self.config = config
        self.loss_history = loss_history or []

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return forward(self.weights, self.biases, (X - self.mean) / self.scale)[-1]

    def _predict_indices(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def state(self) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
        arrays = {"mean": self.mean, "scale": self.scale, "loss_history": np.asarray(self.loss_history)}
        for layer, (W, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            arrays[f"W{layer}"] = W
            arrays[f"b{layer}"] = b
        return {"n_layers": len(self.weights), "config": self.config.model_dump(mode="json")}, arrays

    @classmethod
    def from_state(
        cls, class_set: np.ndarray, n_features: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]
    ) -> "MultilayerPerceptron":
        n_layers = int(meta["n_layers"])
        return cls(
            class_set,
            [arrays[f"W{layer}"] for layer in range(n_layers)],
            [arrays[f"b{layer}"] for layer in range(n_layers)],
            arrays["mean"],
            arrays["scale"],
            MlpConfig.model_validate(meta["config"]),
            [float(v) for v in arrays["loss_history"]],
        )


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def train_mlp(
    X: FeatureMatrix | np.ndarray, y: LabelVector | np.ndarray, cfg: MlpConfig | None = None
) -> MultilayerPerceptron:
    """Fit the network on standardized features; identical cfg.seed gives identical weights"""
    cfg = cfg or MlpConfig()
    X, y = as_feature_matrix(X), as_label_vector(y)
    check_training_data(X, y)

    class_set = y.class_set
    targets = np.eye(len(class_set))[y.indices(class_set)]
    mean, scale = standardize_fit(X.values)
    Z = (X.values - mean) / scale

    rng = np.random.default_rng(cfg.seed)
    sizes = [X.cols, *cfg.hidden_sizes, len(class_set)]
    weights = [glorot_uniform(rng, fan_in, fan_out) for fan_in, fan_out in zip(sizes[:-1], sizes[1:], strict=True)]
    biases = [np.zeros(fan_out) for fan_out in sizes[1:]]
    velocity_w = [np.zeros_like(W) for W in weights]
    velocity_b = [np.zeros_like(b) for b in biases]

    model = MultilayerPerceptron(class_set, weights, biases, mean, scale, cfg)
    for epoch in range(cfg.epochs):
        order = rng.permutation(X.rows)
        epoch_loss = 0.0
        for start in range(0, X.rows, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss, grad_w, grad_b = mlp_loss_and_gradients(weights, biases, Z[batch], targets[batch])
            if not np.isfinite(loss):
                raise InvariantViolationError(f"MLP loss became non-finite in epoch {epoch + 1}")
            for layer in range(len(weights)):
                velocity_w[layer] = cfg.momentum * velocity_w[layer] - cfg.learning_rate * grad_w[layer]
                velocity_b[layer] = cfg.momentum * velocity_b[layer] - cfg.learning_rate * grad_b[layer]
                weights[layer] += velocity_w[layer]
                biases[layer] += velocity_b[layer]
            epoch_loss += loss * len(batch)
        model.loss_history.append(epoch_loss / X.rows)
        model.logger.debug(f"Epoch {epoch + 1}/{cfg.epochs}: loss {model.loss_history[-1]:.6f}")

    return model

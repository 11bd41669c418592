#!/usr/bin/env python3
"""
Base types for the classifier suite
Feature/label containers, the TrainedModel interface and model file persistence
"""

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, ClassVar

import numpy as np

from ..artifacts import read_artifact, write_artifact
from ..errors import (
    DegenerateLabelsError,
    DimensionMismatchError,
    LengthMismatchError,
    NonFiniteFeaturesError,
    TooFewExamplesError,
    VersionMismatchError,
)

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"SRSWMDL\x00"
MODEL_VERSION = 1


class FeatureKind(str, Enum):
    COUNTS = "counts"
    LATENT = "latent"
    TFIDF = "tfidf"


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rectangular finite feature values tagged with how they were produced"""

    values: np.ndarray
    kind: FeatureKind

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatchError(2, values.ndim)
        if not np.all(np.isfinite(values)):
            raise NonFiniteFeaturesError("feature matrix contains NaN or infinite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", FeatureKind(self.kind))

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True, eq=False)
class LabelVector:
    labels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64).reshape(-1))

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def class_set(self) -> np.ndarray:
        return np.unique(self.labels)

    def indices(self, class_set: np.ndarray) -> np.ndarray:
        """Position of every label inside class_set"""
        return np.searchsorted(class_set, self.labels)


def as_feature_matrix(X: "FeatureMatrix | np.ndarray | Sequence[Sequence[float]]") -> FeatureMatrix:
    """Wrap raw arrays; integer arrays count as counts, anything else as latent"""
    if isinstance(X, FeatureMatrix):
        return X
    array = np.asarray(X)
    kind = FeatureKind.COUNTS if np.issubdtype(array.dtype, np.integer) else FeatureKind.LATENT
    return FeatureMatrix(array, kind)


def as_label_vector(y: "LabelVector | np.ndarray | Sequence[int]") -> LabelVector:
    return y if isinstance(y, LabelVector) else LabelVector(np.asarray(y))


def check_training_data(X: FeatureMatrix, y: LabelVector, min_classes: int = 2) -> None:
    if X.rows != len(y):
        raise LengthMismatchError(X.rows, len(y))
    if X.rows < 2:
        raise TooFewExamplesError(f"need at least 2 training examples, got {X.rows}")
    n_classes = len(y.class_set)
    if n_classes < min_classes:
        raise DegenerateLabelsError(f"need at least {min_classes} distinct labels, got {n_classes}")


def first_top_indices(scores: np.ndarray, rel_tolerance: float = 1e-12) -> np.ndarray:
    """Per-row argmax where scores within rounding of the maximum count as tied

    Ties resolve to the lowest column, which is the smallest label.
    """
    top = scores.max(axis=1, keepdims=True)
    slack = rel_tolerance * np.maximum(1.0, np.abs(top))
    return np.argmax(scores >= top - slack, axis=1)


def standardize_fit(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column mean and std (std floored to 1 for constant columns)"""
    mean = values.mean(axis=0)
    scale = values.std(axis=0)
    scale[scale < 1e-12] = 1.0
    return mean, scale


class TrainedModel(ABC):
    """A trained classifier whose predictions always fall inside class_set"""

    kind: ClassVar[str]
    registry: ClassVar[dict[str, type["TrainedModel"]]] = {}

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if "kind" in cls.__dict__:
            TrainedModel.registry[cls.kind] = cls

    def __init__(self, class_set: np.ndarray, n_features: int):
        self.class_set = np.asarray(class_set, dtype=np.int64)
        self.n_features = int(n_features)
        self.logger = logger.getChild(self.__class__.__name__)

    @abstractmethod
    def _predict_indices(self, X: np.ndarray) -> np.ndarray:
        """Index into class_set for every row of a validated matrix"""

    @abstractmethod
    def state(self) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
        """JSON-able metadata and arrays that fully describe the model"""

    @classmethod
    @abstractmethod
    def from_state(
        cls, class_set: np.ndarray, n_features: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]
    ) -> "TrainedModel":
        """Rebuild a model from state()"""

    def predict_many(self, X: "FeatureMatrix | np.ndarray") -> np.ndarray:
        values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.n_features:
            raise DimensionMismatchError(self.n_features, int(values.shape[-1]) if values.ndim else 0)
        if values.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        return self.class_set[self._predict_indices(values)]


def predict(model: TrainedModel, x: "np.ndarray | Sequence[float]") -> int:
    """Category id for one feature row"""
    row = np.asarray(x, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != model.n_features:
        raise DimensionMismatchError(model.n_features, int(row.shape[-1]) if row.ndim else 0)
    return int(model.predict_many(row.reshape(1, -1))[0])


def model_filename(kind: str, seed: int) -> str:
    return f"{kind}-{seed}.model"


def save_model(model: TrainedModel, path: str | Path) -> None:
    meta, arrays = model.state()
    header = {
        "kind": model.kind,
        "class_set": [int(c) for c in model.class_set],
        "n_features": model.n_features,
        **meta,
    }
    write_artifact(path, MODEL_MAGIC, MODEL_VERSION, header, arrays)
    logger.info(f"Saved {model.kind} model to {path}")


def load_model(path: str | Path) -> TrainedModel:
    meta, arrays = read_artifact(path, MODEL_MAGIC, MODEL_VERSION)
    kind = meta.get("kind")
    model_cls = TrainedModel.registry.get(str(kind))
    if model_cls is None:
        raise VersionMismatchError(f"{path}: unknown model kind '{kind}'")
    return model_cls.from_state(np.asarray(meta["class_set"], dtype=np.int64), int(meta["n_features"]), meta, arrays)

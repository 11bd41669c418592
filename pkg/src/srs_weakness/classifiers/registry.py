#!/usr/bin/env python3
"""
Algorithm registry
Maps algorithm names to trainers and carries their hyperparameters
"""

from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import UnknownAlgorithmError
from .base import FeatureMatrix, LabelVector, TrainedModel
from .decision_tree import DEFAULT_MAX_DEPTH, DEFAULT_MIN_LEAF, train_decision_tree
from .linear_svm import DEFAULT_EPOCHS, DEFAULT_LAMBDA, train_linear_svm
from .mlp import MlpConfig, train_mlp
from .naive_bayes import train_gaussian_nb, train_multinomial_nb


class SvmSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    epochs: int = Field(default=DEFAULT_EPOCHS, ge=1)
    lam: float = Field(default=DEFAULT_LAMBDA, gt=0, alias="lambda")


class TreeSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    max_depth: int = Field(default=DEFAULT_MAX_DEPTH, ge=0)
    min_leaf: int = Field(default=DEFAULT_MIN_LEAF, ge=1)


class ClassifierSettings(BaseModel):
    """Hyperparameters for every algorithm kind"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mlp: MlpConfig = Field(default_factory=MlpConfig)
    svm: SvmSettings = Field(default_factory=SvmSettings)
    tree: TreeSettings = Field(default_factory=TreeSettings)


Trainer = Callable[[FeatureMatrix, LabelVector, ClassifierSettings, int | None], TrainedModel]

TRAINERS: dict[str, Trainer] = {
    "gaussian_nb": lambda X, y, settings, seed: train_gaussian_nb(X, y),
    "multinomial_nb": lambda X, y, settings, seed: train_multinomial_nb(X, y),
    "linear_svm": lambda X, y, settings, seed: train_linear_svm(
        X, y, settings.svm.epochs, settings.svm.lam, 0 if seed is None else seed
    ),
    "decision_tree": lambda X, y, settings, seed: train_decision_tree(
        X, y, settings.tree.max_depth, settings.tree.min_leaf
    ),
    "mlp": lambda X, y, settings, seed: train_mlp(
        X, y, settings.mlp if seed is None else settings.mlp.model_copy(update={"seed": seed})
    ),
}

ALGORITHMS: tuple[str, ...] = tuple(TRAINERS)


def validate_algorithms(names: list[str] | tuple[str, ...]) -> list[str]:
    """Reject unknown names, listing the valid ones"""
    for name in names:
        if name not in TRAINERS:
            raise UnknownAlgorithmError(name, list(ALGORITHMS))
    return list(names)


def train_classifier(
    name: str,
    X: FeatureMatrix | np.ndarray,
    y: LabelVector | np.ndarray,
    settings: ClassifierSettings | None = None,
    seed: int | None = None,
) -> TrainedModel:
    """Train the named algorithm

    seed drives the SVM sample order and the MLP init/shuffle; when None the MLP
    keeps settings.mlp.seed and the SVM uses 0.
    """
    validate_algorithms([name])
    return TRAINERS[name](X, y, settings or ClassifierSettings(), seed)  # type: ignore[arg-type]

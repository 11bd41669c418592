"""
Classifier suite: naive Bayes, linear SVM, decision tree and MLP behind one interface
"""

from .base import (
    FeatureKind,
    FeatureMatrix,
    LabelVector,
    TrainedModel,
    load_model,
    model_filename,
    predict,
    save_model,
)
from .decision_tree import DecisionTree, train_decision_tree
from .linear_svm import LinearSvm, train_linear_svm
from .mlp import MlpConfig, MultilayerPerceptron, train_mlp
from .naive_bayes import GaussianNaiveBayes, MultinomialNaiveBayes, train_gaussian_nb, train_multinomial_nb
from .registry import ALGORITHMS, ClassifierSettings, SvmSettings, TreeSettings, train_classifier, validate_algorithms

__all__ = [
    "ALGORITHMS",
    "ClassifierSettings",
    "DecisionTree",
    "FeatureKind",
    "FeatureMatrix",
    "GaussianNaiveBayes",
    "LabelVector",
    "LinearSvm",
    "MlpConfig",
    "MultilayerPerceptron",
    "MultinomialNaiveBayes",
    "SvmSettings",
    "TrainedModel",
    "TreeSettings",
    "load_model",
    "model_filename",
    "predict",
    "save_model",
    "train_classifier",
    "train_decision_tree",
    "train_gaussian_nb",
    "train_linear_svm",
    "train_mlp",
    "train_multinomial_nb",
    "validate_algorithms",
]

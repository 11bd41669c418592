#!/usr/bin/env python3
"""
Classifier feature space
Fits vocabulary (and LSA for latent features) on training texts and turns any texts into a FeatureMatrix
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .classifiers.base import FeatureKind, FeatureMatrix
from .lsa_engine import DEFAULT_K, LatentModel, effective_rank, fit_lsa, project_matrix
from .text_pipeline import StopwordList, Vocabulary, Weighting, build_matrix, build_vocabulary, default_stopwords, tokenize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureSpace:
    """Frozen text-to-feature transform; texts outside the training set are folded in"""

    kind: FeatureKind
    vocabulary: Vocabulary
    stopwords: StopwordList
    weighting: Weighting = Weighting.RAW_COUNTS
    model: LatentModel | None = None

    @property
    def n_features(self) -> int:
        return self.model.k if self.model is not None else self.vocabulary.size

    @classmethod
    def fit(
        cls,
        texts: Sequence[str],
        kind: FeatureKind | str = FeatureKind.LATENT,
        k: int = DEFAULT_K,
        seed: int = 0,
        weighting: Weighting | str = Weighting.RAW_COUNTS,
        min_df: int = 1,
        stopwords: StopwordList | None = None,
    ) -> "FeatureSpace":
        kind = FeatureKind(kind)
        stopwords = stopwords or default_stopwords()
        docs = [tokenize(text, stopwords) for text in texts]
        vocabulary = build_vocabulary(docs, min_df)

        if kind is FeatureKind.LATENT:
            weighting = Weighting(weighting)
            matrix = build_matrix(docs, vocabulary, weighting)
            model = fit_lsa(matrix, effective_rank(k, matrix.rows, matrix.cols), seed)
            return cls(kind, vocabulary, stopwords, weighting, model)
        if kind is FeatureKind.TFIDF:
            return cls(kind, vocabulary, stopwords, Weighting.TFIDF)
        return cls(kind, vocabulary, stopwords, Weighting.RAW_COUNTS)

    def transform(self, texts: Sequence[str]) -> FeatureMatrix:
        if not texts:
            return FeatureMatrix(np.zeros((0, self.n_features)), self.kind)
        docs = [tokenize(text, self.stopwords) for text in texts]
        matrix = build_matrix(docs, self.vocabulary, self.weighting)
        if self.model is not None:
            return FeatureMatrix(project_matrix(self.model, matrix), self.kind)
        if self.kind is FeatureKind.COUNTS:
            return FeatureMatrix(matrix.data.toarray().astype(np.int64), self.kind)
        return FeatureMatrix(matrix.data.toarray(), self.kind)

#!/usr/bin/env python3
"""
Prediction bundles
A directory holding everything needed to label new requirements: manifest,
vocabulary, stopwords, optional LSA model and the trained classifier
"""

import json
import logging
import shutil
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .classifiers.base import FeatureKind, TrainedModel, load_model, model_filename, save_model
from .classifiers.registry import ClassifierSettings, train_classifier
from .corpus_ingest import CweCatalog
from .errors import ArtifactIoError, MissingFileError, RefuseOverwriteError, VersionMismatchError
from .feature_space import FeatureSpace
from .lsa_engine import DEFAULT_K, load_latent_model, save_latent_model
from .text_pipeline import StopwordList, Vocabulary, Weighting, load_stopwords
from .weakness_mapper import LabeledDataset

logger = logging.getLogger(__name__)

BUNDLE_FORMAT = 1
MANIFEST_NAME = "manifest.json"
VOCABULARY_NAME = "vocabulary.json"
STOPWORDS_NAME = "stopwords.txt"
LSA_NAME = "lsa.model"


@dataclass
class PredictionBundle:
    space: FeatureSpace
    model: TrainedModel
    category_names: dict[int, str] = field(default_factory=dict)
    manifest: dict[str, Any] = field(default_factory=dict)

    def predict(self, texts: Sequence[str]) -> list[int]:
        if not texts:
            return []
        return [int(label) for label in self.model.predict_many(self.space.transform(texts))]

    def category_name(self, category_id: int) -> str:
        return self.category_names.get(category_id, "")


def train_bundle(
    ds: LabeledDataset,
    algorithm: str,
    feature_kind: FeatureKind | str = FeatureKind.LATENT,
    settings: ClassifierSettings | None = None,
    k: int = DEFAULT_K,
    seed: int = 0,
    weighting: Weighting | str = Weighting.RAW_COUNTS,
    min_df: int = 1,
    stopwords: StopwordList | None = None,
    catalog: CweCatalog | None = None,
) -> PredictionBundle:
    """Fit features and one classifier on the whole training set"""
    texts = ds.texts
    space = FeatureSpace.fit(texts, feature_kind, k, seed, weighting, min_df, stopwords)
    model = train_classifier(algorithm, space.transform(texts), np.asarray(ds.labels), settings, seed)

    names = {}
    if catalog is not None:
        names = {int(c): catalog.category_name(int(c)) for c in model.class_set}

    manifest = {
        "format": BUNDLE_FORMAT,
        "tool_version": __version__,
        "algorithm": algorithm,
        "model_file": model_filename(model.kind, seed),
        "feature_kind": space.kind.value,
        "weighting": space.weighting.value,
        "k": space.model.k if space.model is not None else None,
        "seed": seed,
        "min_df": min_df,
        "n_features": space.n_features,
        "vocab_sha256": space.vocabulary.content_hash(),
        "stopwords_sha256": space.stopwords.sha256,
        "dataset_sha256": ds.content_hash(),
        "class_set": [int(c) for c in model.class_set],
        "category_names": {str(c): name for c, name in sorted(names.items())},
    }
    logger.info(f"Trained {algorithm} bundle on {len(ds)} examples ({space.kind.value}, {space.n_features} features)")
    return PredictionBundle(space, model, names, manifest)


def save_bundle(bundle: PredictionBundle, directory: str | Path, force: bool = False) -> Path:
    directory = Path(directory)
    if directory.exists() and any(directory.iterdir()) and not force:
        raise RefuseOverwriteError(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        (directory / VOCABULARY_NAME).write_text(bundle.space.vocabulary.to_json() + "\n", encoding="utf-8")
        shutil.copyfile(bundle.space.stopwords.path, directory / STOPWORDS_NAME)
        (directory / MANIFEST_NAME).write_text(json.dumps(bundle.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ArtifactIoError(f"cannot write bundle {directory}: {e}") from e
    if bundle.space.model is not None:
        save_latent_model(bundle.space.model, directory / LSA_NAME, {"vocab_sha256": bundle.manifest["vocab_sha256"]})
    save_model(bundle.model, directory / bundle.manifest["model_file"])
    logger.info(f"Saved prediction bundle to {directory}")
    return directory


def read_manifest(directory: str | Path) -> dict[str, Any]:
    path = Path(directory) / MANIFEST_NAME
    if not path.is_file():
        raise MissingFileError(path)
    try:
        manifest: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactIoError(f"cannot read bundle manifest {path}: {e}") from e
    return manifest


def load_bundle(directory: str | Path) -> PredictionBundle:
    """Load a bundle and check every part against the manifest"""
    directory = Path(directory)
    manifest = read_manifest(directory)
    if manifest.get("format") != BUNDLE_FORMAT:
        raise VersionMismatchError(f"{directory}: bundle format {manifest.get('format')}, expected {BUNDLE_FORMAT}")

    vocab_path = directory / VOCABULARY_NAME
    if not vocab_path.is_file():
        raise MissingFileError(vocab_path)
    vocabulary = Vocabulary.from_json(vocab_path.read_text(encoding="utf-8"))
    if vocabulary.content_hash() != manifest["vocab_sha256"]:
        raise VersionMismatchError(f"{vocab_path}: vocabulary hash differs from the one the model was trained with")

    stopwords = load_stopwords(directory / STOPWORDS_NAME)
    if stopwords.sha256 != manifest["stopwords_sha256"]:
        raise VersionMismatchError(f"{directory}: stopword list differs from the one the model was trained with")

    kind = FeatureKind(manifest["feature_kind"])
    lsa = None
    if kind is FeatureKind.LATENT:
        lsa, lsa_meta = load_latent_model(directory / LSA_NAME)
        if lsa_meta.get("vocab_sha256") != manifest["vocab_sha256"] or lsa.n_terms != vocabulary.size:
            raise VersionMismatchError(f"{directory}: LSA model was fitted on a different vocabulary")
    space = FeatureSpace(kind, vocabulary, stopwords, Weighting(manifest["weighting"]), lsa)

    model = load_model(directory / manifest["model_file"])
    if model.n_features != space.n_features:
        raise VersionMismatchError(
            f"{directory}: classifier expects {model.n_features} features, bundle produces {space.n_features}"
        )
    names = {int(c): str(name) for c, name in manifest.get("category_names", {}).items()}
    return PredictionBundle(space, model, names, manifest)

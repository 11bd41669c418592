#!/usr/bin/env python3
"""
Run configuration
Validated settings for every pipeline stage; command-line flags override the JSON
config file, which overrides the defaults below
"""

import json
import logging
import os
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .classifiers.base import FeatureKind
from .classifiers.mlp import MlpConfig
from .classifiers.registry import ALGORITHMS, ClassifierSettings, SvmSettings, TreeSettings, validate_algorithms
from .corpus_ingest import RequirementColumns
from .errors import ConfigError, MissingFileError
from .evaluation import DEFAULT_FRACTIONS, ExperimentParams
from .lsa_engine import DEFAULT_K
from .text_pipeline import StopwordList, Weighting, default_stopwords, load_stopwords
from .weakness_mapper import DEFAULT_LOW_SIMILARITY, MappingParams

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "SRS_WEAKNESS_CONFIG"
TRAINING_SET_NAME = "training_set.csv"
FLAG_REPORT_NAME = "low_similarity.csv"
REPORT_NAME = "experiment_report.csv"
SUMMARY_NAME = "experiment_summary.txt"
BUNDLE_NAME = "bundle"
PREDICTIONS_NAME = "predictions.csv"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class PathsConfig(_Section):
    cwe_weaknesses: Path | None = None
    cwe_categories: Path | None = None
    requirements: Path | None = None
    output_dir: Path = Path("out")
    dataset: Path | None = None
    bundle_dir: Path | None = None


class ColumnsConfig(_Section):
    project_id: str = "ProjectID"
    text: str = "RequirementText"
    label: str = "Class"

    def as_columns(self) -> RequirementColumns:
        return RequirementColumns(self.project_id, self.text, self.label)


class TextConfig(_Section):
    min_df: int = Field(default=1, ge=1)
    weighting: Weighting = Weighting.RAW_COUNTS
    stopwords: Path | None = None


class LsaConfig(_Section):
    k: int = Field(default=DEFAULT_K, ge=1)
    seed: int = 0


class ExperimentConfig(_Section):
    fractions: list[float] = Field(default_factory=lambda: list(DEFAULT_FRACTIONS), min_length=1)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    algorithms: list[str] = Field(default_factory=lambda: list(ALGORITHMS), min_length=1)
    feature_kind: FeatureKind = FeatureKind.LATENT
    feature_overrides: dict[str, FeatureKind] = Field(default_factory=dict)
    stratified: bool = True
    workers: int = Field(default=1, ge=1)

    @field_validator("fractions")
    @classmethod
    def _fractions_in_range(cls, value: list[float]) -> list[float]:
        for fraction in value:
            if not 0.0 < fraction < 1.0:
                raise ValueError(f"train fraction {fraction} is not in (0, 1)")
        return value


class TrainConfig(_Section):
    algorithm: str = "mlp"
    feature_kind: FeatureKind | None = None


class RunConfig(_Section):
    """Effective configuration of one run"""

    paths: PathsConfig = Field(default_factory=PathsConfig)
    requirements_columns: ColumnsConfig = Field(default_factory=ColumnsConfig)
    text: TextConfig = Field(default_factory=TextConfig)
    lsa: LsaConfig = Field(default_factory=LsaConfig)
    mlp: MlpConfig = Field(default_factory=MlpConfig)
    svm: SvmSettings = Field(default_factory=SvmSettings)
    tree: TreeSettings = Field(default_factory=TreeSettings)
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    low_similarity_threshold: float = DEFAULT_LOW_SIMILARITY

    def echo(self) -> dict[str, Any]:
        """JSON-ready dump recorded in provenance files"""
        return self.model_dump(mode="json", by_alias=True)

    def stopword_list(self) -> StopwordList:
        return load_stopwords(self.text.stopwords) if self.text.stopwords else default_stopwords()

    def classifier_settings(self) -> ClassifierSettings:
        return ClassifierSettings(mlp=self.mlp, svm=self.svm, tree=self.tree)

    def mapping_params(self) -> MappingParams:
        return MappingParams(
            k=self.lsa.k,
            seed=self.lsa.seed,
            weighting=self.text.weighting,
            min_df=self.text.min_df,
            stopwords=self.stopword_list(),
            low_similarity_threshold=self.low_similarity_threshold,
        )

    def experiment_params(self) -> ExperimentParams:
        return ExperimentParams(
            classifier=self.classifier_settings(),
            feature_kind=self.experiment.feature_kind,
            feature_overrides=dict(self.experiment.feature_overrides),
            k=self.lsa.k,
            weighting=self.text.weighting,
            min_df=self.text.min_df,
            stopwords=self.stopword_list(),
            stratified=self.experiment.stratified,
            workers=self.experiment.workers,
        )

    @property
    def dataset_path(self) -> Path:
        return self.paths.dataset or self.paths.output_dir / TRAINING_SET_NAME

    @property
    def bundle_path(self) -> Path:
        return self.paths.bundle_dir or self.paths.output_dir / BUNDLE_NAME

    def require_inputs(self, *names: str) -> list[Path]:
        """Resolve named input paths, failing on unset or missing files"""
        resolved = []
        for name in names:
            path = getattr(self.paths, name)
            if path is None:
                raise ConfigError(f"paths.{name} is not configured")
            if not Path(path).exists():
                raise MissingFileError(path)
            resolved.append(Path(path))
        return resolved

    def ensure_output_dir(self) -> Path:
        try:
            self.paths.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"cannot create output directory {self.paths.output_dir}: {e}") from e
        return self.paths.output_dir


def _deep_merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return payload


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Defaults, then the config file (argument or environment), then overrides"""
    path = path or os.environ.get(CONFIG_ENV_VAR) or None
    payload = read_config_file(path) if path else {}
    if path:
        logger.info(f"Loaded configuration from {path}")
    payload = _deep_merge(payload, overrides or {})

    try:
        config = RunConfig.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"invalid configuration at {where}: {first['msg']}") from e

    validate_algorithms(config.experiment.algorithms)
    validate_algorithms(list(config.experiment.feature_overrides))
    validate_algorithms([config.train.algorithm])
    return config

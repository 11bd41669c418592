#!/usr/bin/env python3
"""
Pipeline services shared by the command line and the MCP tool server
Each function runs one stage end to end from a RunConfig and reports what it wrote
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pandas as pd

from .artifacts import read_artifact_header
from .bundle import MANIFEST_NAME, PredictionBundle, load_bundle, read_manifest, save_bundle, train_bundle
from .config import FLAG_REPORT_NAME, PREDICTIONS_NAME, REPORT_NAME, SUMMARY_NAME, TRAINING_SET_NAME, RunConfig
from .corpus_ingest import CweCatalog, RequirementColumns, load_cwe_catalog, load_requirements
from .errors import ArtifactIoError, MalformedRowError, MissingFileError
from .evaluation import EvalReport, run_experiment, write_report
from .weakness_mapper import (
    LabeledDataset,
    build_training_set,
    export_flag_report,
    export_training_set,
    guard_overwrite,
    import_training_set,
    provenance_path,
    read_provenance,
)

logger = logging.getLogger(__name__)

PREDICTION_COLUMNS = ["line_number", "requirement_text", "predicted_category_id", "category_name"]


@dataclass
class MapResult:
    dataset: LabeledDataset
    written: list[Path]


@dataclass
class ExperimentResult:
    report: EvalReport
    written: list[Path]


@dataclass
class PredictResult:
    n_predictions: int
    output: Path


def load_catalog(config: RunConfig) -> CweCatalog:
    weakness_path, category_path = config.require_inputs("cwe_weaknesses", "cwe_categories")
    return load_cwe_catalog(weakness_path, category_path)


def run_map(config: RunConfig, force: bool = False) -> MapResult:
    """Ingest, vectorize, fit LSA, map every requirement and write the training set"""
    catalog = load_catalog(config)
    (requirements_path,) = config.require_inputs("requirements")
    requirements = load_requirements(requirements_path, config.requirements_columns.as_columns())

    output_dir = config.ensure_output_dir()
    csv_path = output_dir / TRAINING_SET_NAME
    flag_path = output_dir / FLAG_REPORT_NAME
    guard_overwrite([csv_path, provenance_path(csv_path), flag_path], force)

    dataset = build_training_set(catalog, requirements, config.mapping_params(), config_echo=config.echo())
    written = export_training_set(dataset, csv_path, force=True)
    written.append(export_flag_report(dataset, flag_path, force=True))
    return MapResult(dataset, written)


def run_experiment_command(config: RunConfig, force: bool = False) -> ExperimentResult:
    """Compare the configured algorithms over every fraction and seed"""
    dataset = import_training_set(config.dataset_path)
    output_dir = config.ensure_output_dir()
    csv_path, summary_path = output_dir / REPORT_NAME, output_dir / SUMMARY_NAME
    guard_overwrite([csv_path, summary_path], force)

    report = run_experiment(
        dataset,
        config.experiment.algorithms,
        config.experiment.fractions,
        config.experiment.seeds,
        config.experiment_params(),
    )
    return ExperimentResult(report, write_report(report, csv_path, summary_path, force=True))


def run_train(config: RunConfig, force: bool = False) -> PredictionBundle:
    """Train the configured algorithm on the whole training set and save a prediction bundle"""
    dataset = import_training_set(config.dataset_path)
    catalog = None
    if config.paths.cwe_weaknesses and config.paths.cwe_categories:
        catalog = load_catalog(config)

    algorithm = config.train.algorithm
    feature_kind = (
        config.train.feature_kind
        or config.experiment.feature_overrides.get(algorithm)
        or config.experiment.feature_kind
    )
    bundle = train_bundle(
        dataset,
        algorithm,
        feature_kind,
        config.classifier_settings(),
        k=config.lsa.k,
        seed=config.lsa.seed,
        weighting=config.text.weighting,
        min_df=config.text.min_df,
        stopwords=config.stopword_list(),
        catalog=catalog,
    )
    bundle.manifest["config"] = config.echo()
    save_bundle(bundle, config.bundle_path, force)
    return bundle


def read_srs(path: str | Path, columns: RequirementColumns | None = None) -> list[tuple[int, str]]:
    """(line number, requirement text) pairs from a plain-text or requirements-CSV file

    Plain text holds one requirement per line; blank lines are skipped. CSV rows
    are numbered with the header as row 1.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return [(req.row_index + 2, req.text) for req in load_requirements(path, columns)]
    if not path.is_file():
        raise MissingFileError(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise MalformedRowError(path, raw.count(b"\n", 0, e.start) + 1, "invalid UTF-8 byte sequence") from e
    return [(number, line.strip()) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]


def run_predict(
    bundle_dir: str | Path,
    srs_path: str | Path,
    output_path: str | Path,
    force: bool = False,
    columns: RequirementColumns | None = None,
) -> PredictResult:
    """Label every requirement of an SRS file with a weakness category"""
    output_path = Path(output_path)
    guard_overwrite([output_path], force)
    bundle = load_bundle(bundle_dir)
    rows = read_srs(srs_path, columns)
    labels = bundle.predict([text for _, text in rows])

    frame = pd.DataFrame(
        [(number, text, label, bundle.category_name(label)) for (number, text), label in zip(rows, labels, strict=True)],
        columns=PREDICTION_COLUMNS,
    )
    try:
        frame.to_csv(output_path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise ArtifactIoError(f"cannot write {output_path}: {e}") from e
    logger.info(f"Wrote {len(frame)} predictions to {output_path}")
    return PredictResult(len(frame), output_path)


def default_predictions_path(config: RunConfig) -> Path:
    return config.paths.output_dir / PREDICTIONS_NAME


def inspect_artifact(path: str | Path) -> dict[str, Any]:
    """Provenance of any artifact this tool writes"""
    path = Path(path)
    if not path.exists():
        raise MissingFileError(path)

    if path.is_dir():
        return {"artifact": "bundle", **read_manifest(path)}
    if path.name == MANIFEST_NAME:
        return {"artifact": "bundle", **read_manifest(path.parent)}
    if path.suffix == ".json":
        return {"artifact": "provenance", **read_provenance(path)}
    if path.suffix == ".csv":
        sidecar = provenance_path(path)
        if sidecar.is_file():
            return {"artifact": "training_set", **read_provenance(sidecar)}
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, nrows=1)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ArtifactIoError(f"cannot read {path}: {e}") from e
        if "dataset_sha256" in frame.columns and len(frame):
            return {"artifact": "experiment_report", "dataset_sha256": frame["dataset_sha256"].iloc[0]}
        raise ArtifactIoError(f"{path}: no provenance recorded for this CSV")
    return {"artifact": "binary", **read_artifact_header(path)}


def format_inspection(info: dict[str, Any]) -> str:
    return json.dumps(info, indent=2, sort_keys=True, default=str)

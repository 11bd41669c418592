#!/usr/bin/env python3
"""
Evaluation harness
Seeded (stratified) train/test splits, accuracy and confusion metrics, and the
algorithm x split x seed experiment with its CSV report and text summary
"""

import logging
import math
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .classifiers.base import FeatureKind, FeatureMatrix, LabelVector
from .classifiers.registry import ClassifierSettings, train_classifier, validate_algorithms
from .errors import (
    ArtifactIoError,
    DegenerateLabelsError,
    EmptyCorpusError,
    EmptyInputError,
    LengthMismatchError,
    NegativeOrNonCountFeaturesError,
    NonFiniteFeaturesError,
    RefuseOverwriteError,
    TooFewExamplesError,
)
from .feature_space import FeatureSpace
from .lsa_engine import DEFAULT_K
from .text_pipeline import StopwordList, Weighting
from .weakness_mapper import LabeledDataset

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.8, 0.7, 0.6)
REPORT_COLUMNS = [
    "algorithm",
    "feature_kind",
    "train_fraction",
    "seed",
    "n_train",
    "n_test",
    "status",
    "accuracy",
    "macro_precision",
    "macro_recall",
    "precision_by_class",
    "recall_by_class",
    "class_set",
    "confusion",
    "dataset_sha256",
]

# Errors that mean "this algorithm cannot consume this data", recorded as FAILED cells
FORMAT_ERRORS = (NegativeOrNonCountFeaturesError, DegenerateLabelsError, NonFiniteFeaturesError)

# Published accuracies per algorithm: per-split values where given, plus the headline figure
PUBLISHED_ACCURACY: dict[str, tuple[dict[float, float], str]] = {
    "linear_svm": ({0.8: 0.648, 0.7: 0.643, 0.6: 0.636}, "0.642"),
    "mlp": ({}, "0.86-0.992"),
    "gaussian_nb": ({}, "~0.12"),
    "decision_tree": ({}, "~0.10"),
    "multinomial_nb": ({}, "error"),
}
PUBLISHED_MLP_FLOOR = 0.86
STABILITY_LIMIT = 0.10


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5 + 1e-9))


def _clamp(value: int, low: int, high: int) -> int:
    return max(low, min(high, value))


def _stratified_quotas(class_sizes: dict[int, int], fraction: float, target: int) -> dict[int, int]:
    """Per-class train counts that keep >= 1 test member in every class of size >= 2"""
    quotas = {}
    for label, size in class_sizes.items():
        quotas[label] = 1 if size == 1 else _clamp(_round_half_up(fraction * size), 1, size - 1)

    diff = target - sum(quotas.values())
    while diff != 0:
        if diff > 0:
            candidates = [c for c, n in class_sizes.items() if n >= 2 and quotas[c] < n - 1]
            if not candidates:
                break
            # largest shortfall first, smallest label on equal shortfall
            chosen = min(candidates, key=lambda c: (-(fraction * class_sizes[c] - quotas[c]), c))
            quotas[chosen] += 1
            diff -= 1
        else:
            candidates = [c for c, n in class_sizes.items() if n >= 2 and quotas[c] > 1]
            if not candidates:
                break
            chosen = min(candidates, key=lambda c: (-(quotas[c] - fraction * class_sizes[c]), c))
            quotas[chosen] -= 1
            diff += 1
    return quotas


def split(ds: LabeledDataset | Sequence[int], spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint sorted (train, test) index arrays covering every row"""
    labels = np.asarray(ds.labels if isinstance(ds, LabeledDataset) else list(ds), dtype=np.int64)
    n = labels.shape[0]
    if n < 2:
        raise TooFewExamplesError(f"need at least 2 examples to split, got {n}")

    target = _clamp(_round_half_up(spec.train_fraction * n), 1, n - 1)
    rng = np.random.default_rng(spec.seed)

    if not spec.stratified:
        order = rng.permutation(n)
        return np.sort(order[:target]), np.sort(order[target:])

    class_set = np.unique(labels)
    members = {int(c): np.flatnonzero(labels == c) for c in class_set}
    quotas = _stratified_quotas({c: len(rows) for c, rows in members.items()}, spec.train_fraction, target)

    train_parts = []
    test_parts = []
    for label in sorted(members):
        shuffled = members[label][rng.permutation(len(members[label]))]
        train_parts.append(shuffled[: quotas[label]])
        test_parts.append(shuffled[quotas[label] :])
    if sum(len(part) for part in test_parts) == 0:
        raise TooFewExamplesError("no class has two or more members, nothing left to test on")
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))


def _check_pairs(predictions: Sequence[int] | np.ndarray, truth: Sequence[int] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(predictions, dtype=np.int64).reshape(-1)
    true = np.asarray(truth, dtype=np.int64).reshape(-1)
    if pred.shape[0] != true.shape[0]:
        raise LengthMismatchError(pred.shape[0], true.shape[0])
    if pred.shape[0] == 0:
        raise EmptyInputError("cannot score an empty prediction list")
    return pred, true


def accuracy(predictions: Sequence[int] | np.ndarray, truth: Sequence[int] | np.ndarray) -> float:
    pred, true = _check_pairs(predictions, truth)
    return float(np.mean(pred == true))


def confusion_matrix(
    predictions: Sequence[int] | np.ndarray, truth: Sequence[int] | np.ndarray, class_set: np.ndarray
) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class"""
    pred, true = _check_pairs(predictions, truth)
    class_set = np.asarray(class_set, dtype=np.int64)
    matrix = np.zeros((len(class_set), len(class_set)), dtype=np.int64)
    np.add.at(matrix, (np.searchsorted(class_set, true), np.searchsorted(class_set, pred)), 1)
    return matrix


def precision_recall(confusion: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-class precision and recall; 0.0 where a class is never predicted or never present"""
    tp = np.diag(confusion).astype(np.float64)
    predicted = confusion.sum(axis=0).astype(np.float64)
    actual = confusion.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    return precision, recall


@dataclass
class EvalCell:
    """Result of one (algorithm, train fraction, seed) run"""

    algorithm: str
    feature_kind: str
    train_fraction: float
    seed: int
    n_train: int
    n_test: int
    class_set: np.ndarray
    confusion: np.ndarray | None = None
    failure: str | None = None
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failure is None

    @property
    def accuracy(self) -> float | None:
        if self.confusion is None:
            return None
        return float(np.trace(self.confusion) / self.confusion.sum())

    @property
    def accuracy_text(self) -> str:
        return f"FAILED({self.failure})" if self.failure else f"{self.accuracy:.4f}"

    def macro_precision_recall(self) -> tuple[float, float] | None:
        if self.confusion is None:
            return None
        precision, recall = precision_recall(self.confusion)
        return float(precision.mean()), float(recall.mean())


@dataclass
class EvalReport:
    cells: list[EvalCell]
    algorithms: list[str]
    fractions: list[float]
    seeds: list[int]
    dataset_sha256: str
    provenance: dict[str, Any] = field(default_factory=dict)
    settings_echo: dict[str, Any] = field(default_factory=dict)

    def cell(self, algorithm: str, fraction: float, seed: int) -> EvalCell:
        for c in self.cells:
            if c.algorithm == algorithm and c.train_fraction == fraction and c.seed == seed:
                return c
        raise KeyError((algorithm, fraction, seed))

    def accuracies(self, algorithm: str, seed: int | None = None) -> list[float]:
        return [
            c.accuracy
            for c in self.cells
            if c.algorithm == algorithm and c.accuracy is not None and (seed is None or c.seed == seed)
        ]

    def mean_accuracy(self, algorithm: str, seed: int | None = None) -> float | None:
        """Arithmetic mean over the successful split cells (and seeds when seed is None)"""
        values = self.accuracies(algorithm, seed)
        return float(sum(values) / len(values)) if values else None

    def stability_spread(self, algorithm: str, seed: int) -> float | None:
        """max - min accuracy across train fractions at one seed"""
        values = self.accuracies(algorithm, seed)
        return float(max(values) - min(values)) if values else None

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for c in self.cells:
            classes = ";".join(str(v) for v in c.class_set)
            if c.confusion is None:
                rows.append(
                    [c.algorithm, c.feature_kind, c.train_fraction, c.seed, c.n_train, c.n_test,
                     f"FAILED({c.failure})", "", "", "", "", "", classes, "", self.dataset_sha256]
                )
                continue
            precision, recall = precision_recall(c.confusion)
            macro = c.macro_precision_recall()
            assert macro is not None
            rows.append(
                [
                    c.algorithm,
                    c.feature_kind,
                    c.train_fraction,
                    c.seed,
                    c.n_train,
                    c.n_test,
                    "OK",
                    c.accuracy,
                    macro[0],
                    macro[1],
                    ";".join(f"{v:.6f}" for v in precision),
                    ";".join(f"{v:.6f}" for v in recall),
                    classes,
                    "|".join(" ".join(str(int(v)) for v in row) for row in c.confusion),
                    self.dataset_sha256,
                ]
            )
        for algorithm in self.algorithms:
            for seed in self.seeds:
                mean = self.mean_accuracy(algorithm, seed)
                rows.append(
                    [algorithm, "", "mean", seed, "", "", "MEAN" if mean is not None else "FAILED",
                     mean if mean is not None else "", "", "", "", "", "", "", self.dataset_sha256]
                )
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def summary_text(self) -> str:
        """Human-readable accuracy table beside the published figures"""
        lines = ["Experiment report", f"dataset_sha256: {self.dataset_sha256}"]
        for key in ("catalog_sha256", "requirements_sha256", "vocab_sha256", "k", "seed"):
            if key in self.provenance:
                lines.append(f"mapping {key}: {self.provenance[key]}")
        lines.append("")

        seed_headers = [f"seed={s}" for s in self.seeds]
        header = f"{'algorithm':<16}{'split':<8}" + "".join(f"{h:<30}" for h in seed_headers)
        lines.append(header + f"{'mean':<10}{'published':<12}")
        for algorithm in self.algorithms:
            published_splits, headline = PUBLISHED_ACCURACY.get(algorithm, ({}, ""))
            for fraction in self.fractions:
                split_name = f"{round(fraction * 100)}/{round((1 - fraction) * 100)}"
                row = f"{algorithm:<16}{split_name:<8}"
                values = []
                for seed in self.seeds:
                    c = self.cell(algorithm, fraction, seed)
                    row += f"{c.accuracy_text:<30}"
                    if c.accuracy is not None:
                        values.append(c.accuracy)
                mean = f"{sum(values) / len(values):.4f}" if values else "-"
                published = published_splits.get(fraction)
                row += f"{mean:<10}{(f'{published:.3f}' if published else ''):<12}"
                lines.append(row.rstrip())

        lines += ["", f"{'algorithm':<16}{'mean':<10}{'published':<12}{'max split spread':<18}"]
        for algorithm in self.algorithms:
            mean = self.mean_accuracy(algorithm)
            spreads = [s for s in (self.stability_spread(algorithm, seed) for seed in self.seeds) if s is not None]
            spread = f"{max(spreads):.4f}" if spreads else "-"
            mean_text = f"{mean:.4f}" if mean is not None else "FAILED"
            headline = PUBLISHED_ACCURACY.get(algorithm, ({}, ""))[1]
            lines.append(f"{algorithm:<16}{mean_text:<10}{headline:<12}{spread:<18}".rstrip())

        notes = []
        for algorithm in self.algorithms:
            spreads = [s for s in (self.stability_spread(algorithm, seed) for seed in self.seeds) if s is not None]
            if spreads and max(spreads) > STABILITY_LIMIT:
                notes.append(f"note: {algorithm} split spread {max(spreads):.4f} exceeds {STABILITY_LIMIT:.2f}")
        mlp_mean = self.mean_accuracy("mlp") if "mlp" in self.algorithms else None
        if mlp_mean is not None and mlp_mean < PUBLISHED_MLP_FLOOR:
            notes.append(
                f"note: mlp held-out accuracy {mlp_mean:.4f} is below the published floor {PUBLISHED_MLP_FLOOR}; "
                "published figures may include training-set evaluation"
            )
        if notes:
            lines += ["", *notes]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExperimentParams:
    """Everything run_experiment needs besides the dataset, algorithms, splits and seeds"""

    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)
    feature_kind: FeatureKind = FeatureKind.LATENT
    feature_overrides: dict[str, FeatureKind] = field(default_factory=dict)
    k: int = DEFAULT_K
    weighting: Weighting = Weighting.RAW_COUNTS
    min_df: int = 1
    stopwords: StopwordList | None = None
    stratified: bool = True
    workers: int = 1

    def kind_for(self, algorithm: str) -> FeatureKind:
        return FeatureKind(self.feature_overrides.get(algorithm, self.feature_kind))

    def echo(self) -> dict[str, Any]:
        return {
            "classifier": self.classifier.model_dump(mode="json", by_alias=True),
            "feature_kind": self.feature_kind.value,
            "feature_overrides": {k: FeatureKind(v).value for k, v in sorted(self.feature_overrides.items())},
            "k": self.k,
            "weighting": Weighting(self.weighting).value,
            "min_df": self.min_df,
            "stratified": self.stratified,
        }


def _evaluate_cell(
    algorithm: str,
    fraction: float,
    seed: int,
    features: tuple[FeatureMatrix, FeatureMatrix],
    labels: tuple[LabelVector, LabelVector],
    class_set: np.ndarray,
    params: ExperimentParams,
) -> EvalCell:
    X_train, X_test = features
    y_train, y_test = labels
    cell = EvalCell(algorithm, X_train.kind.value, fraction, seed, X_train.rows, X_test.rows, class_set)
    started = time.perf_counter()
    try:
        model = train_classifier(algorithm, X_train, y_train, params.classifier, seed)
    except FORMAT_ERRORS as e:
        cell.failure = e.code
        logger.warning(f"{algorithm} split={fraction} seed={seed}: FAILED({e.code}) {e}")
        return cell
    predictions = model.predict_many(X_test)
    cell.confusion = confusion_matrix(predictions, y_test.labels, class_set)
    cell.wall_time = time.perf_counter() - started
    logger.info(
        f"{algorithm} split={fraction} seed={seed}: accuracy {cell.accuracy:.4f} "
        f"({cell.n_train}/{cell.n_test}, {cell.wall_time:.2f}s)"
    )
    return cell


def run_experiment(
    ds: LabeledDataset,
    algorithms: Sequence[str],
    splits: Sequence[float] = DEFAULT_FRACTIONS,
    seeds: Sequence[int] = (0,),
    params: ExperimentParams | None = None,
) -> EvalReport:
    """Train every algorithm on every (split, seed) train set and score it on the held-out rows"""
    params = params or ExperimentParams()
    if len(ds) == 0:
        raise EmptyCorpusError("training set is empty")
    if not algorithms or not splits or not seeds:
        raise EmptyInputError("need at least one algorithm, split and seed")
    algorithms = validate_algorithms(list(algorithms))

    texts = ds.texts
    all_labels = np.asarray(ds.labels, dtype=np.int64)
    class_set = np.unique(all_labels)

    jobs = []
    for fraction in splits:
        for seed in seeds:
            train_idx, test_idx = split(all_labels, SplitSpec(fraction, seed, params.stratified))
            train_texts = [texts[i] for i in train_idx]
            test_texts = [texts[i] for i in test_idx]
            labels = (LabelVector(all_labels[train_idx]), LabelVector(all_labels[test_idx]))

            spaces: dict[FeatureKind, tuple[FeatureMatrix, FeatureMatrix]] = {}
            for algorithm in algorithms:
                kind = params.kind_for(algorithm)
                if kind not in spaces:
                    space = FeatureSpace.fit(
                        train_texts, kind, params.k, seed, params.weighting, params.min_df, params.stopwords
                    )
                    spaces[kind] = (space.transform(train_texts), space.transform(test_texts))
                jobs.append((algorithm, fraction, seed, spaces[kind], labels))

    logger.info(
        f"Running {len(jobs)} cells: {len(algorithms)} algorithms x {len(splits)} splits x {len(seeds)} seeds"
    )
    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            futures = [pool.submit(_evaluate_cell, *job, class_set, params) for job in jobs]
            results = [f.result() for f in futures]
    else:
        results = [_evaluate_cell(*job, class_set, params) for job in jobs]

    position = {(job[0], job[1], job[2]): i for i, job in enumerate(jobs)}
    algorithm_rank = {name: i for i, name in enumerate(algorithms)}
    results.sort(key=lambda c: (algorithm_rank[c.algorithm], position[(c.algorithm, c.train_fraction, c.seed)]))
    return EvalReport(
        cells=results,
        algorithms=list(algorithms),
        fractions=list(splits),
        seeds=list(seeds),
        dataset_sha256=ds.content_hash(),
        provenance=dict(ds.provenance),
        settings_echo=params.echo(),
    )


def write_report(report: EvalReport, csv_path: str | Path, summary_path: str | Path, force: bool = False) -> list[Path]:
    """Write the per-cell CSV and the text summary"""
    paths = [Path(csv_path), Path(summary_path)]
    if not force:
        for path in paths:
            if path.exists():
                raise RefuseOverwriteError(path)
    try:
        report.to_frame().to_csv(paths[0], index=False, lineterminator="\n", encoding="utf-8")
        paths[1].write_text(report.summary_text(), encoding="utf-8")
    except OSError as e:
        raise ArtifactIoError(f"cannot write report: {e}") from e
    logger.info(f"Wrote experiment report to {paths[0]} and {paths[1]}")
    return paths


#!/usr/bin/env python3
"""
Weakness mapper
Labels every requirement with its most similar CWE weakness in a joint LSA space,
abstracts the match to its category and reads/writes the resulting training set
"""

import hashlib
import io
import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np
import pandas as pd

from . import __version__
from .corpus_ingest import CweCatalog, Requirement, resolve_category
from .errors import (
    ArtifactIoError,
    EmptyCorpusError,
    InvariantViolationError,
    MalformedRowError,
    MissingFileError,
    RefuseOverwriteError,
    SchemaMismatchError,
)
from .lsa_engine import DEFAULT_K, LatentModel, LatentVector, cosine_to_rows, effective_rank, fit_lsa, project_matrix
from .text_pipeline import (
    StopwordList,
    Vocabulary,
    Weighting,
    build_matrix,
    build_vocabulary,
    default_stopwords,
    tokenize,
)

logger = logging.getLogger(__name__)

TRAINING_SET_COLUMNS = ["requirement_text", "cwe_description", "cwe_id", "category_id", "similarity"]
FLAG_REPORT_COLUMNS = ["row_index", "similarity"]
DEFAULT_LOW_SIMILARITY = 0.1


@dataclass(frozen=True)
class LabeledExample:
    requirement_text: str
    matched_cwe_id: int
    matched_description: str
    category_id: int
    similarity: float


@dataclass(frozen=True)
class LabeledDataset:
    """Training set in requirement row order plus the provenance of its mapping run"""

    examples: tuple[LabeledExample, ...]
    provenance: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def texts(self) -> list[str]:
        return [e.requirement_text for e in self.examples]

    @property
    def labels(self) -> list[int]:
        return [e.category_id for e in self.examples]

    @property
    def low_similarity_threshold(self) -> float:
        return float(self.provenance.get("low_similarity_threshold", DEFAULT_LOW_SIMILARITY))

    def flagged_rows(self) -> list[tuple[int, float]]:
        """(row_index, similarity) of dubious labels, zero-norm requirements included"""
        threshold = self.low_similarity_threshold
        return [(i, e.similarity) for i, e in enumerate(self.examples) if e.similarity < threshold]

    def content_hash(self) -> str:
        digest = hashlib.sha256()
        for e in self.examples:
            digest.update(f"{e.requirement_text}\t{e.matched_cwe_id}\t{e.category_id}\t{e.similarity!r}\n".encode())
        return digest.hexdigest()


class JointSpace(NamedTuple):
    """Shared vocabulary and LSA model with both collections projected into it"""

    vocabulary: Vocabulary
    model: LatentModel
    weakness_vectors: np.ndarray
    requirement_vectors: np.ndarray


class MatchResult(NamedTuple):
    cwe_id: int
    category_id: int
    similarity: float
    zero_norm: bool


@dataclass(frozen=True)
class MappingParams:
    k: int = DEFAULT_K
    seed: int = 0
    weighting: Weighting = Weighting.RAW_COUNTS
    min_df: int = 1
    stopwords: StopwordList | None = None
    low_similarity_threshold: float = DEFAULT_LOW_SIMILARITY


def requirements_hash(reqs: Sequence[Requirement]) -> str:
    digest = hashlib.sha256()
    for req in reqs:
        digest.update(f"{req.row_index}\t{req.project_id}\t{req.text}\t{req.original_class}\n".encode())
    return digest.hexdigest()


def build_joint_space(
    catalog: CweCatalog,
    reqs: Sequence[Requirement],
    k: int = DEFAULT_K,
    seed: int = 0,
    weighting: Weighting | str = Weighting.RAW_COUNTS,
    min_df: int = 1,
    stopwords: StopwordList | None = None,
) -> JointSpace:
    """Fit one vocabulary and one LSA model on weakness descriptions followed by requirement texts"""
    if not catalog.weaknesses:
        raise EmptyCorpusError("CWE catalog has no weaknesses")
    if not reqs:
        raise EmptyCorpusError("no requirements to map")

    stopwords = stopwords or default_stopwords()
    docs = [tokenize(w.description, stopwords) for w in catalog.ordered_weaknesses()]
    docs += [tokenize(r.text, stopwords) for r in reqs]

    vocabulary = build_vocabulary(docs, min_df)
    matrix = build_matrix(docs, vocabulary, weighting)
    rank = effective_rank(k, matrix.rows, matrix.cols)
    if rank != k:
        logger.info(f"Requested k={k} capped to {rank} for a {matrix.rows}x{matrix.cols} joint matrix")
    model = fit_lsa(matrix, rank, seed)

    projected = project_matrix(model, matrix)
    n_weaknesses = len(catalog)
    return JointSpace(vocabulary, model, projected[:n_weaknesses], projected[n_weaknesses:])


def map_requirement(
    req_vec: LatentVector | np.ndarray, weakness_vecs: np.ndarray, catalog: CweCatalog
) -> MatchResult:
    """Argmax-cosine weakness (smallest CWE id on ties) and its category"""
    coords = req_vec.coords if isinstance(req_vec, LatentVector) else np.asarray(req_vec, dtype=np.float64)
    weakness_ids = catalog.weakness_ids()
    if len(weakness_ids) != weakness_vecs.shape[0] or not weakness_ids:
        raise InvariantViolationError(
            f"{weakness_vecs.shape[0]} weakness vectors for {len(weakness_ids)} catalog weaknesses"
        )

    scores = cosine_to_rows(coords, weakness_vecs)
    best = int(np.argmax(scores))
    cwe_id = weakness_ids[best]
    zero_norm = not np.any(coords)
    return MatchResult(cwe_id, resolve_category(catalog, cwe_id), float(scores[best]), zero_norm)


def build_training_set(
    catalog: CweCatalog,
    reqs: Sequence[Requirement],
    params: MappingParams | None = None,
    config_echo: dict[str, Any] | None = None,
) -> LabeledDataset:
    """Map every requirement and record how the labels were produced"""
    params = params or MappingParams()
    stopwords = params.stopwords or default_stopwords()
    space = build_joint_space(catalog, reqs, params.k, params.seed, params.weighting, params.min_df, stopwords)

    examples = []
    zero_norm_rows = []
    for req, vector in zip(reqs, space.requirement_vectors, strict=True):
        match = map_requirement(vector, space.weakness_vectors, catalog)
        if match.zero_norm:
            zero_norm_rows.append(req.row_index)
        examples.append(
            LabeledExample(
                requirement_text=req.text,
                matched_cwe_id=match.cwe_id,
                matched_description=catalog.weaknesses[match.cwe_id].description,
                category_id=match.category_id,
                similarity=match.similarity,
            )
        )

    provenance: dict[str, Any] = {
        "tool_version": __version__,
        "catalog_sha256": catalog.content_hash(),
        "requirements_sha256": requirements_hash(reqs),
        "vocab_sha256": space.vocabulary.content_hash(),
        "stopwords_sha256": stopwords.sha256,
        "requested_k": params.k,
        "k": space.model.k,
        "seed": params.seed,
        "weighting": Weighting(params.weighting).value,
        "min_df": params.min_df,
        "vocabulary_size": space.vocabulary.size,
        "n_weaknesses": len(catalog),
        "n_categories": len(catalog.categories),
        "n_requirements": len(reqs),
        "low_similarity_threshold": params.low_similarity_threshold,
        "zero_norm_rows": zero_norm_rows,
    }
    if config_echo is not None:
        provenance["config"] = config_echo

    dataset = LabeledDataset(tuple(examples), provenance)
    flagged = dataset.flagged_rows()
    if zero_norm_rows:
        logger.warning(f"{len(zero_norm_rows)} requirements have no in-vocabulary token and matched nothing")
    if flagged:
        logger.warning(f"{len(flagged)} requirements mapped below similarity {params.low_similarity_threshold}")
    logger.info(
        f"Mapped {len(examples)} requirements onto {len(set(dataset.labels))} distinct categories "
        f"(k={space.model.k}, vocabulary={space.vocabulary.size})"
    )
    return dataset


def provenance_path(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".provenance.json")


def guard_overwrite(paths: Sequence[Path], force: bool) -> None:
    if force:
        return
    for path in paths:
        if path.exists():
            raise RefuseOverwriteError(path)


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise ArtifactIoError(f"cannot write {path}: {e}") from e


def write_provenance(provenance: dict[str, Any], path: str | Path) -> None:
    try:
        Path(path).write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ArtifactIoError(f"cannot write {path}: {e}") from e


def read_provenance(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)
    try:
        payload: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactIoError(f"cannot read provenance {path}: {e}") from e
    return payload


def export_training_set(ds: LabeledDataset, path: str | Path, force: bool = False) -> list[Path]:
    """Write the training-set CSV and its provenance file; returns the written paths"""
    path = Path(path)
    sidecar = provenance_path(path)
    guard_overwrite([path, sidecar], force)

    frame = pd.DataFrame(
        [(e.requirement_text, e.matched_description, e.matched_cwe_id, e.category_id, e.similarity) for e in ds.examples],
        columns=TRAINING_SET_COLUMNS,
    )
    _write_csv(frame, path)
    write_provenance(ds.provenance, sidecar)
    logger.info(f"Wrote training set with {len(ds)} rows to {path}")
    return [path, sidecar]


def export_flag_report(ds: LabeledDataset, path: str | Path, force: bool = False) -> Path:
    path = Path(path)
    guard_overwrite([path], force)
    _write_csv(pd.DataFrame(ds.flagged_rows(), columns=FLAG_REPORT_COLUMNS), path)
    return path


def import_training_set(path: str | Path) -> LabeledDataset:
    """Read a training set written by export_training_set"""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ArtifactIoError(f"cannot read training set {path}: {e}") from e
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False).fillna("")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ArtifactIoError(f"cannot parse training set {path}: {e}") from e

    for column in TRAINING_SET_COLUMNS:
        if column not in frame.columns:
            raise SchemaMismatchError(path, column)
    for column in frame.columns:
        if column not in TRAINING_SET_COLUMNS:
            raise SchemaMismatchError(path, str(column))

    examples = []
    for offset, (text_value, description, cwe_id, category_id, similarity) in enumerate(
        frame[TRAINING_SET_COLUMNS].itertuples(index=False, name=None)
    ):
        try:
            examples.append(LabeledExample(text_value, int(cwe_id), description, int(category_id), float(similarity)))
        except ValueError as e:
            raise MalformedRowError(path, offset + 2, str(e)) from e

    sidecar = provenance_path(path)
    provenance = read_provenance(sidecar) if sidecar.is_file() else {}
    return LabeledDataset(tuple(examples), provenance)

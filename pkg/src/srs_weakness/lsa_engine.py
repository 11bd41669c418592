#!/usr/bin/env python3
"""
Latent Semantic Analysis engine
Rank-k truncated SVD of the term-document matrix, fold-in projection and cosine similarity
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import svds

from .artifacts import read_artifact, write_artifact
from .errors import DimensionMismatchError, RankTooLargeError, ZeroMatrixError
from .text_pipeline import SparseVector, TermDocMatrix

logger = logging.getLogger(__name__)

LSA_MAGIC = b"SRSWLSA\x00"
LSA_VERSION = 1

DEFAULT_K = 100
DENSE_LIMIT = 64


@dataclass(frozen=True, eq=False)
class LatentModel:
    """Truncated SVD factors A ~= U diag(s) V^T

    Document coordinates are U*s; term factors are V*s, so the fold-in
    s^-1 * term_factors^T * v reduces to V^T v.
    """

    k: int
    seed: int
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def n_docs(self) -> int:
        return int(self.left_vectors.shape[0])

    @property
    def n_terms(self) -> int:
        return int(self.right_vectors.shape[0])

    @property
    def doc_factors(self) -> np.ndarray:
        return self.left_vectors * self.singular_values

    @property
    def term_factors(self) -> np.ndarray:
        return self.right_vectors * self.singular_values

    def orthonormality_error(self) -> float:
        """Max-abs deviation of U^T U and V^T V from identity"""
        eye = np.eye(self.k)
        return float(
            max(
                np.abs(self.left_vectors.T @ self.left_vectors - eye).max(),
                np.abs(self.right_vectors.T @ self.right_vectors - eye).max(),
            )
        )


@dataclass(frozen=True, eq=False)
class LatentVector:
    coords: np.ndarray

    def __len__(self) -> int:
        return int(self.coords.shape[0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


def effective_rank(k: int, n_docs: int, n_terms: int) -> int:
    """Requested k capped at min(D, V) - 1, never below 1"""
    return max(1, min(k, min(n_docs, n_terms) - 1))


def _fix_signs(left: np.ndarray, right: np.ndarray) -> None:
    """Make the largest-magnitude entry of every left vector positive"""
    pivots = np.abs(left).argmax(axis=0)
    signs = np.sign(left[pivots, np.arange(left.shape[1])])
    signs[signs == 0] = 1.0
    left *= signs
    right *= signs


def _sparse_svd(A: csr_matrix, k: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-k singular triplets by ARPACK Lanczos, descending"""
    v0 = np.random.default_rng(seed).standard_normal(min(A.shape))
    u, s, vt = svds(A, k=k, v0=v0, tol=0.0, which="LM", solver="arpack")
    order = np.argsort(s)[::-1]
    return u[:, order], s[order], vt[order].T


def fit_lsa(matrix: TermDocMatrix, k: int, seed: int = 0) -> LatentModel:
    """Best rank-k factorization of the term-document matrix"""
    A = matrix.data.astype(np.float64)
    limit = min(A.shape)
    if not 1 <= k <= limit:
        raise RankTooLargeError(k, limit)
    if A.nnz == 0 or not np.any(A.data):
        raise ZeroMatrixError(f"term-document matrix {A.shape[0]}x{A.shape[1]} has no nonzero entry")

    if limit <= DENSE_LIMIT or k == limit:
        u, s, vt = np.linalg.svd(A.toarray(), full_matrices=False)
        left, singular_values, right = u[:, :k], s[:k], vt[:k].T
        method = "dense"
    else:
        left, singular_values, right = _sparse_svd(A, k, seed)
        method = "arpack"

    left = np.ascontiguousarray(left)
    right = np.ascontiguousarray(right)
    _fix_signs(left, right)

    logger.info(
        f"Fitted LSA ({method}) on {A.shape[0]}x{A.shape[1]} matrix: k={k}, "
        f"top singular value {singular_values[0]:.4f}"
    )
    return LatentModel(k, seed, np.ascontiguousarray(singular_values), left, right)


def project(model: LatentModel, v: SparseVector | np.ndarray) -> LatentVector:
    """Fold a term vector into the latent space"""
    if isinstance(v, SparseVector):
        if v.dimension != model.n_terms:
            raise DimensionMismatchError(model.n_terms, v.dimension)
        rows = model.right_vectors[list(v.indices)]
        return LatentVector(np.asarray(v.values, dtype=np.float64) @ rows if v.indices else np.zeros(model.k))

    dense = np.asarray(v, dtype=np.float64)
    if dense.shape != (model.n_terms,):
        raise DimensionMismatchError(model.n_terms, int(dense.shape[-1]) if dense.ndim else 0)
    return LatentVector(model.right_vectors.T @ dense)


def project_matrix(model: LatentModel, matrix: TermDocMatrix) -> np.ndarray:
    """Fold every row of a term-document matrix in at once (N x k)"""
    if matrix.cols != model.n_terms:
        raise DimensionMismatchError(model.n_terms, matrix.cols)
    return np.asarray(matrix.data @ model.right_vectors)


def cosine(a: LatentVector, b: LatentVector) -> float:
    """Cosine similarity, 0.0 when either vector has zero norm"""
    if len(a) != len(b):
        raise DimensionMismatchError(len(a), len(b))
    norm_a, norm_b = a.norm, b.norm
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.clip(np.dot(a.coords, b.coords) / (norm_a * norm_b), -1.0, 1.0))


def cosine_to_rows(query: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Cosine of one vector against every row; zero-norm pairs score 0.0"""
    if rows.shape[1] != query.shape[0]:
        raise DimensionMismatchError(rows.shape[1], query.shape[0])
    query_norm = np.linalg.norm(query)
    row_norms = np.linalg.norm(rows, axis=1)
    denom = row_norms * query_norm
    scores = np.zeros(rows.shape[0])
    nonzero = denom > 0
    scores[nonzero] = (rows[nonzero] @ query) / denom[nonzero]
    return np.asarray(np.clip(scores, -1.0, 1.0))


def reconstruction_error(model: LatentModel, matrix: TermDocMatrix) -> float:
    """Frobenius norm of A minus its rank-k reconstruction"""
    approx = (model.left_vectors * model.singular_values) @ model.right_vectors.T
    return float(np.linalg.norm(matrix.data.toarray() - approx))


def save_latent_model(model: LatentModel, path: str | Path, extra_meta: dict[str, str] | None = None) -> None:
    meta = {"kind": "lsa", "k": model.k, "seed": model.seed, **(extra_meta or {})}
    write_artifact(
        path,
        LSA_MAGIC,
        LSA_VERSION,
        meta,
        {
            "singular_values": model.singular_values,
            "left_vectors": model.left_vectors,
            "right_vectors": model.right_vectors,
        },
    )


def load_latent_model(path: str | Path) -> tuple[LatentModel, dict[str, str]]:
    """Load an LSA model and the metadata stored with it"""
    meta, arrays = read_artifact(path, LSA_MAGIC, LSA_VERSION)
    model = LatentModel(
        k=int(meta["k"]),
        seed=int(meta["seed"]),
        singular_values=arrays["singular_values"],
        left_vectors=arrays["left_vectors"],
        right_vectors=arrays["right_vectors"],
    )
    return model, meta

#!/usr/bin/env python3
"""
Bag-of-words text pipeline
Tokenization, shared vocabulary, sparse count vectors and the term-document matrix
"""

import hashlib
import json
import logging
import re
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix

from .errors import ConfigError, EmptyCorpusError, EmptyVocabularyError, MissingFileError, VersionMismatchError

logger = logging.getLogger(__name__)

DEFAULT_STOPWORDS_PATH = Path(__file__).parent / "data" / "stopwords.txt"
MIN_TOKEN_LENGTH = 2

# Runs of letters; digits and underscores are separators
_TOKEN_RE = re.compile(r"[^\W\d_]+")


class Weighting(str, Enum):
    RAW_COUNTS = "raw_counts"
    TFIDF = "tfidf"


@dataclass(frozen=True)
class StopwordList:
    words: frozenset[str]
    sha256: str
    path: str

    def __contains__(self, word: object) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)


def load_stopwords(path: str | Path | None = None) -> StopwordList:
    """Load a stopword file (one lowercase word per line) and hash its content"""
    path = Path(path) if path else DEFAULT_STOPWORDS_PATH
    if not path.is_file():
        raise MissingFileError(path)
    raw = path.read_bytes()
    words = frozenset(line.strip().lower() for line in raw.decode("utf-8").splitlines() if line.strip())
    return StopwordList(words, hashlib.sha256(raw).hexdigest(), str(path))


@lru_cache(maxsize=1)
def default_stopwords() -> StopwordList:
    return load_stopwords(DEFAULT_STOPWORDS_PATH)


def tokenize(text: str, stopwords: StopwordList | None = None) -> list[str]:
    """Lowercase letter runs of length >= 2 that are not stopwords"""
    stopwords = stopwords if stopwords is not None else default_stopwords()
    return [
        token
        for token in _TOKEN_RE.findall(text.lower())
        if len(token) >= MIN_TOKEN_LENGTH and token not in stopwords
    ]


@dataclass(frozen=True)
class Vocabulary:
    """Bijective term index with document frequencies"""

    term_to_index: dict[str, int]
    doc_freq: dict[str, int]
    total_docs: int

    @property
    def size(self) -> int:
        return len(self.term_to_index)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, term: object) -> bool:
        return term in self.term_to_index

    def __getitem__(self, term: str) -> int:
        return self.term_to_index[term]

    @property
    def terms(self) -> list[str]:
        """Terms in index order"""
        return sorted(self.term_to_index, key=self.term_to_index.__getitem__)

    def idf(self) -> np.ndarray:
        """ln(N / df) per column"""
        df = np.array([self.doc_freq[t] for t in self.terms], dtype=np.float64)
        return np.log(self.total_docs / df)

    def content_hash(self) -> str:
        digest = hashlib.sha256(f"N\t{self.total_docs}\n".encode())
        for term in self.terms:
            digest.update(f"{term}\t{self.doc_freq[term]}\n".encode())
        return digest.hexdigest()

    def to_json(self) -> str:
        payload = {
            "total_docs": self.total_docs,
            "terms": [[term, self.doc_freq[term]] for term in self.terms],
            "sha256": self.content_hash(),
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        payload: dict[str, Any] = json.loads(text)
        terms = [(str(term), int(df)) for term, df in payload["terms"]]
        vocab = cls(
            term_to_index={term: i for i, (term, _) in enumerate(terms)},
            doc_freq=dict(terms),
            total_docs=int(payload["total_docs"]),
        )
        expected = payload.get("sha256")
        if expected and expected != vocab.content_hash():
            raise VersionMismatchError("vocabulary content does not match its recorded hash")
        return vocab


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, value) entries, no stored zeros"""

    dimension: int
    indices: tuple[int, ...]
    values: tuple[float, ...]

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices, self.values, strict=True))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dimension, dtype=np.float64)
        dense[list(self.indices)] = self.values
        return dense


@dataclass(frozen=True)
class TermDocMatrix:
    """D x V sparse document-by-term matrix"""

    data: csr_matrix
    weighting: Weighting

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def cols(self) -> int:
        return int(self.data.shape[1])

    def row(self, i: int) -> SparseVector:
        start, end = self.data.indptr[i], self.data.indptr[i + 1]
        return SparseVector(
            self.cols,
            tuple(int(j) for j in self.data.indices[start:end]),
            tuple(float(v) for v in self.data.data[start:end]),
        )


def build_vocabulary(docs: Sequence[Sequence[str]], min_df: int = 1) -> Vocabulary:
    """Terms with document frequency >= min_df, indexed in lexicographic order"""
    if min_df < 1:
        raise ConfigError(f"min_df must be >= 1, got {min_df}")
    if not docs:
        raise EmptyCorpusError("cannot build a vocabulary from zero documents")

    counts: Counter[str] = Counter()
    for doc in docs:
        counts.update(set(doc))

    kept = sorted(term for term, df in counts.items() if df >= min_df)
    if not kept:
        raise EmptyVocabularyError(f"no term reaches min_df={min_df} in {len(docs)} documents")

    logger.debug(f"Vocabulary: {len(kept)} of {len(counts)} terms kept at min_df={min_df}")
    return Vocabulary(
        term_to_index={term: i for i, term in enumerate(kept)},
        doc_freq={term: counts[term] for term in kept},
        total_docs=len(docs),
    )


def vectorize(doc: Iterable[str], vocab: Vocabulary) -> SparseVector:
    """Raw term counts of the in-vocabulary tokens of one document"""
    counts = Counter(vocab.term_to_index[token] for token in doc if token in vocab.term_to_index)
    indices = tuple(sorted(counts))
    return SparseVector(vocab.size, indices, tuple(counts[i] for i in indices))


def build_matrix(
    docs: Sequence[Sequence[str]], vocab: Vocabulary, weighting: Weighting | str = Weighting.RAW_COUNTS
) -> TermDocMatrix:
    """Stack document vectors into a CSR matrix, optionally TF-IDF weighted"""
    weighting = Weighting(weighting)
    if not docs:
        raise EmptyCorpusError("cannot build a matrix from zero documents")

    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    for doc in docs:
        vector = vectorize(doc, vocab)
        indices.extend(vector.indices)
        values.extend(vector.values)
        indptr.append(len(indices))

    matrix = csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(docs), vocab.size),
    )
    if weighting is Weighting.TFIDF:
        matrix.data *= vocab.idf()[matrix.indices]
        matrix.eliminate_zeros()

    return TermDocMatrix(matrix, weighting)

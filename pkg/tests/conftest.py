"""
Test configuration and fixtures for the srs-weakness pipeline
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from srs_weakness.corpus_ingest import Requirement, load_cwe_catalog
from srs_weakness.handlers import ExperimentHandler, MappingHandler, PredictionHandler
from srs_weakness.weakness_mapper import LabeledDataset, LabeledExample

# Configure pytest-asyncio to avoid deprecation warnings
pytest_plugins = ("pytest_asyncio",)

# Configure logging for tests
logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

# Four synthetic weakness categories, each with a private keyword set
TOPICS: dict[int, list[str]] = {
    100: ["buffer", "overflow", "memory", "bounds", "pointer", "stack", "heap", "index"],
    200: ["inject", "query", "sql", "escape", "sanitize", "command", "shell", "input"],
    300: ["password", "credential", "login", "authenticate", "session", "token", "account", "lockout"],
    400: ["encrypt", "cipher", "key", "hash", "certificate", "random", "entropy", "tls"],
}
CATEGORY_NAMES = {100: "Memory Buffer Errors", 200: "Injection", 300: "Authentication Errors", 400: "Cryptographic Issues"}
WEAKNESSES_PER_CATEGORY = 5
REQUIREMENTS_PER_CATEGORY = 20


@dataclass
class SyntheticCorpus:
    """Rows of the three input files plus the true category of every requirement"""

    weaknesses: list[tuple[int, str, str]]
    memberships: list[tuple[int, str, int]]
    requirements: list[tuple[str, str, str]]
    true_categories: list[int]


def build_synthetic_corpus(seed: int = 7) -> SyntheticCorpus:
    """Weakness descriptions use six topic words; requirements four topic words plus shared noise"""
    rng = np.random.default_rng(seed)
    weaknesses = []
    memberships = []
    requirements = []
    truth = []
    for category_id, words in TOPICS.items():
        for n in range(WEAKNESSES_PER_CATEGORY):
            cwe_id = category_id + n + 1
            picked = rng.choice(words, size=6, replace=False)
            weaknesses.append((cwe_id, f"{words[n]} weakness {cwe_id}", " ".join(picked)))
            memberships.append((category_id, CATEGORY_NAMES[category_id], cwe_id))
        for _ in range(REQUIREMENTS_PER_CATEGORY):
            picked = rng.choice(words, size=4, replace=False)
            requirements.append(("P1", f"The system shall {' '.join(picked)} for the user", "F"))
            truth.append(category_id)
    order = rng.permutation(len(requirements))
    return SyntheticCorpus(
        weaknesses,
        memberships,
        [requirements[i] for i in order],
        [truth[i] for i in order],
    )


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> Path:
    """Write an RFC-4180 CSV with a header row"""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


@dataclass
class CorpusFiles:
    weaknesses: Path
    categories: Path
    requirements: Path
    corpus: SyntheticCorpus


@pytest.fixture
def synthetic_corpus():
    """In-memory synthetic corpus"""
    return build_synthetic_corpus()


@pytest.fixture
def corpus_files(tmp_path, synthetic_corpus):
    """The synthetic corpus written as the three input CSV files"""
    inputs = tmp_path / "inputs"
    inputs.mkdir()
    return CorpusFiles(
        write_csv(inputs / "weaknesses.csv", ["ID", "Name", "Description"], synthetic_corpus.weaknesses),
        write_csv(inputs / "categories.csv", ["CategoryID", "CategoryName", "MemberID"], synthetic_corpus.memberships),
        write_csv(inputs / "requirements.csv", ["ProjectID", "RequirementText", "Class"], synthetic_corpus.requirements),
        synthetic_corpus,
    )


@pytest.fixture
def synthetic_catalog(corpus_files):
    """Loaded catalog of the synthetic corpus"""
    return load_cwe_catalog(corpus_files.weaknesses, corpus_files.categories)


@pytest.fixture
def synthetic_requirements(synthetic_corpus):
    """Requirement records of the synthetic corpus"""
    return [
        Requirement(i, project, text, label) for i, (project, text, label) in enumerate(synthetic_corpus.requirements)
    ]


@pytest.fixture
def labeled_dataset(synthetic_corpus):
    """Training set labeled with the true synthetic categories"""
    examples = tuple(
        LabeledExample(text, category_id + 1, " ".join(TOPICS[category_id][:6]), category_id, 0.9)
        for (_, text, _), category_id in zip(synthetic_corpus.requirements, synthetic_corpus.true_categories, strict=True)
    )
    return LabeledDataset(examples, {"k": 8, "seed": 0})


@pytest.fixture
def xss_catalog_files(tmp_path):
    """Two-weakness catalog in one category"""
    weaknesses = write_csv(
        tmp_path / "weaknesses.csv",
        ["ID", "Name", "Description"],
        [
            (79, "XSS", "Improper neutralization of input during web page generation"),
            (89, "SQL Injection", "Improper neutralization of special elements in SQL commands"),
        ],
    )
    categories = write_csv(
        tmp_path / "categories.csv",
        ["CategoryID", "CategoryName", "MemberID"],
        [(137, "Data Neutralization Issues", 79), (137, "Data Neutralization Issues", 89)],
    )
    return weaknesses, categories


@pytest.fixture
def mapping_handler():
    """Create a MappingHandler instance"""
    return MappingHandler()


@pytest.fixture
def experiment_handler():
    """Create an ExperimentHandler instance"""
    return ExperimentHandler()


@pytest.fixture
def prediction_handler():
    """Create a PredictionHandler instance"""
    return PredictionHandler()


@pytest.fixture(autouse=True)
def _no_config_from_environment(monkeypatch):
    """Keep a developer's config file out of the tests"""
    monkeypatch.delenv("SRS_WEAKNESS_CONFIG", raising=False)

#!/usr/bin/env python3
"""
Corpus ingestion for the srs-weakness pipeline
Parses the normalized two-file CWE catalog and PROMISE_exp style requirement files

Row numbers in error messages count the header line as row 1.
"""

import csv
import hashlib
import io
import logging
import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import pandas as pd

from .errors import (
    DanglingMembershipError,
    DuplicateIdError,
    EmptyTextError,
    MalformedRowError,
    MissingColumnError,
    MissingFileError,
    UncategorizedError,
    UnknownCweIdError,
)

logger = logging.getLogger(__name__)

WEAKNESS_COLUMNS = ["ID", "Name", "Description"]
CATEGORY_COLUMNS = ["CategoryID", "CategoryName", "MemberID"]


@dataclass(frozen=True)
class CweWeakness:
    """A single CWE weakness entry"""

    id: int
    name: str
    description: str
    category_ids: frozenset[int] = field(default_factory=frozenset)


@dataclass(frozen=True)
class CweCategory:
    """A CWE category grouping weakness ids"""

    id: int
    name: str
    member_ids: frozenset[int]


@dataclass(frozen=True)
class CweCatalog:
    """Id-indexed weaknesses and categories with two-way consistent membership"""

    weaknesses: dict[int, CweWeakness]
    categories: dict[int, CweCategory]

    def __len__(self) -> int:
        return len(self.weaknesses)

    def weakness_ids(self) -> list[int]:
        """Weakness ids in ascending order (the matching order)"""
        return sorted(self.weaknesses)

    def ordered_weaknesses(self) -> Iterator[CweWeakness]:
        for cwe_id in self.weakness_ids():
            yield self.weaknesses[cwe_id]

    def category_name(self, category_id: int) -> str:
        category = self.categories.get(category_id)
        return category.name if category else ""

    def content_hash(self) -> str:
        """Stable sha256 over the canonical catalog content"""
        digest = hashlib.sha256()
        for weakness in self.ordered_weaknesses():
            digest.update(f"W\t{weakness.id}\t{weakness.name}\t{weakness.description}\n".encode())
        for category_id in sorted(self.categories):
            category = self.categories[category_id]
            members = ",".join(str(m) for m in sorted(category.member_ids))
            digest.update(f"C\t{category.id}\t{category.name}\t{members}\n".encode())
        return digest.hexdigest()


@dataclass(frozen=True)
class Requirement:
    """One requirement row from the requirements file"""

    row_index: int
    project_id: str
    text: str
    original_class: str


class RequirementColumns(NamedTuple):
    """Header names of the three requirement columns"""

    project_id: str = "ProjectID"
    text: str = "RequirementText"
    label: str = "Class"


def _record_lines(text: str, first_line: int) -> list[tuple[int, bool]] | None:
    """First physical line and blankness of every record after the header"""
    reader = csv.reader(io.StringIO(text))
    records = []
    previous_end = first_line - 1
    try:
        for record in reader:
            records.append((previous_end + 1, not record))
            previous_end = first_line - 1 + reader.line_num
    except csv.Error:
        return None
    return records[1:]


def _read_csv(path: str | Path) -> pd.DataFrame:
    """Read a UTF-8 CSV with a mandatory header, all cells as strings

    The frame is indexed by the physical line each record starts on, so
    blank lines and quoted line breaks do not shift reported rows.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)

    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        row = raw.count(b"\n", 0, e.start) + 1
        raise MalformedRowError(path, row, "invalid UTF-8 byte sequence") from e

    if not text.strip():
        raise MalformedRowError(path, 1, "missing header row")
    body = text.lstrip("\r\n")
    header_line = text[: len(text) - len(body)].count("\n") + 1

    try:
        frame = pd.read_csv(io.StringIO(body), dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        row = int(match.group(1)) + header_line - 1 if match else 0
        raise MalformedRowError(path, row, str(e).strip()) from e
    frame = frame.fillna("")

    records = _record_lines(body, header_line)
    if records is not None and len(records) == len(frame):
        frame.index = pd.Index([line for line, _ in records])
        return frame.loc[[not blank for _, blank in records]]

    logger.debug(f"{path}: record boundaries unavailable, numbering rows by position")
    frame.index = pd.RangeIndex(header_line + 1, header_line + 1 + len(frame))
    return frame.loc[(frame != "").any(axis=1)]


def _require_columns(frame: pd.DataFrame, path: Path, columns: list[str]) -> None:
    for column in columns:
        if column not in frame.columns:
            raise MalformedRowError(path, 1, f"missing header column '{column}'")


def _parse_id(value: str, path: Path, row: int, column: str) -> int:
    try:
        parsed = int(value.strip())
    except ValueError as e:
        raise MalformedRowError(path, row, f"{column} '{value}' is not an integer") from e
    if parsed <= 0:
        raise MalformedRowError(path, row, f"{column} {parsed} is not a positive integer")
    return parsed


def load_cwe_catalog(weakness_path: str | Path, category_path: str | Path) -> CweCatalog:
    """Load the weakness and category membership files into a consistent catalog"""
    weakness_path = Path(weakness_path)
    category_path = Path(category_path)

    weakness_frame = _read_csv(weakness_path)
    _require_columns(weakness_frame, weakness_path, WEAKNESS_COLUMNS)
    category_frame = _read_csv(category_path)
    _require_columns(category_frame, category_path, CATEGORY_COLUMNS)

    rows: dict[int, tuple[str, str]] = {}
    for row, raw_id, name, description in weakness_frame[WEAKNESS_COLUMNS].itertuples(name=None):
        cwe_id = _parse_id(raw_id, weakness_path, row, "ID")
        if cwe_id in rows:
            raise DuplicateIdError("weakness", cwe_id, row)
        if not name.strip():
            raise MalformedRowError(weakness_path, row, "weakness name is empty")
        if not description.strip():
            raise MalformedRowError(weakness_path, row, "weakness description is empty")
        rows[cwe_id] = (name.strip(), description.strip())

    category_names: dict[int, str] = {}
    members: dict[int, set[int]] = {}
    for row, raw_category, category_name, raw_member in category_frame[CATEGORY_COLUMNS].itertuples(name=None):
        category_id = _parse_id(raw_category, category_path, row, "CategoryID")
        member_id = _parse_id(raw_member, category_path, row, "MemberID")
        category_name = category_name.strip()
        if not category_name:
            raise MalformedRowError(category_path, row, "category name is empty")
        known_name = category_names.setdefault(category_id, category_name)
        if known_name != category_name:
            raise MalformedRowError(
                category_path, row, f"category {category_id} named both '{known_name}' and '{category_name}'"
            )
        if member_id not in rows:
            raise DanglingMembershipError(category_id, member_id)
        category_members = members.setdefault(category_id, set())
        if member_id in category_members:
            raise DuplicateIdError("membership", member_id, row)
        category_members.add(member_id)

    memberships: dict[int, set[int]] = {cwe_id: set() for cwe_id in rows}
    for category_id, member_ids in members.items():
        for member_id in member_ids:
            memberships[member_id].add(category_id)

    weaknesses = {
        cwe_id: CweWeakness(cwe_id, name, description, frozenset(memberships[cwe_id]))
        for cwe_id, (name, description) in sorted(rows.items())
    }
    categories = {
        category_id: CweCategory(category_id, category_names[category_id], frozenset(members[category_id]))
        for category_id in sorted(members)
    }

    uncategorized = sum(1 for w in weaknesses.values() if not w.category_ids)
    logger.info(
        f"Loaded CWE catalog: {len(weaknesses)} weaknesses, {len(categories)} categories, "
        f"{uncategorized} uncategorized"
    )
    return CweCatalog(weaknesses, categories)


def save_cwe_catalog(catalog: CweCatalog, weakness_path: str | Path, category_path: str | Path) -> None:
    """Write a catalog back to the normalized two-file format"""
    weakness_rows = [(w.id, w.name, w.description) for w in catalog.ordered_weaknesses()]
    pd.DataFrame(weakness_rows, columns=WEAKNESS_COLUMNS).to_csv(
        weakness_path, index=False, lineterminator="\n", encoding="utf-8"
    )

    category_rows = [
        (category.id, category.name, member_id)
        for category_id in sorted(catalog.categories)
        for category in [catalog.categories[category_id]]
        for member_id in sorted(category.member_ids)
    ]
    pd.DataFrame(category_rows, columns=CATEGORY_COLUMNS).to_csv(
        category_path, index=False, lineterminator="\n", encoding="utf-8"
    )


def load_requirements(path: str | Path, column_map: RequirementColumns | None = None) -> list[Requirement]:
    """Load requirements in file order with consecutive row indices"""
    path = Path(path)
    columns = column_map or RequirementColumns()
    frame = _read_csv(path)
    for column in columns:
        if column not in frame.columns:
            raise MissingColumnError(path, column)

    requirements = []
    selected = frame[[columns.project_id, columns.text, columns.label]]
    for offset, (row, project_id, text, label) in enumerate(selected.itertuples(name=None)):
        if not text.strip():
            raise EmptyTextError(path, row)
        requirements.append(Requirement(offset, project_id.strip(), text.strip(), label.strip()))

    logger.info(f"Loaded {len(requirements)} requirements from {path}")
    return requirements


def resolve_category(catalog: CweCatalog, cwe_id: int) -> int:
    """Return the encapsulating category of a weakness (smallest id when several)"""
    weakness = catalog.weaknesses.get(cwe_id)
    if weakness is None:
        raise UnknownCweIdError(cwe_id)
    if not weakness.category_ids:
        raise UncategorizedError(cwe_id)
    return min(weakness.category_ids)

"""
Error hierarchy for the srs-weakness pipeline
Every error carries a stable ``code`` used in CLI output and experiment reports
"""

from pathlib import Path


class SrsWeaknessError(Exception):
    """Base class for all pipeline errors"""

    code = "SrsWeaknessError"
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return self.message


class InputError(SrsWeaknessError):
    """Problem with user input, files or configuration (exit code 1)"""

    code = "InputError"


class InvariantViolationError(SrsWeaknessError):
    """Internal contract broken (exit code 2)"""

    code = "InvariantViolation"
    exit_code = 2


# Ingestion


class MissingFileError(InputError):
    code = "MissingFile"

    def __init__(self, path: str | Path):
        self.path = str(path)
        super().__init__(f"file not found: {self.path}")


class MalformedRowError(InputError):
    code = "MalformedRow"

    def __init__(self, path: str | Path, row: int, reason: str):
        self.path = str(path)
        self.row = row
        self.reason = reason
        super().__init__(f"{self.path} row {row}: {reason}")


class DuplicateIdError(InputError):
    code = "DuplicateId"

    def __init__(self, kind: str, item_id: int, row: int | None = None):
        self.kind = kind
        self.item_id = item_id
        self.row = row
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"duplicate {kind} id {item_id}{where}")


class DanglingMembershipError(InputError):
    code = "DanglingMembership"

    def __init__(self, category_id: int, member_id: int):
        self.category_id = category_id
        self.member_id = member_id
        super().__init__(f"category {category_id} references unknown weakness id {member_id}")


class MissingColumnError(InputError):
    code = "MissingColumn"

    def __init__(self, path: str | Path, column: str):
        self.path = str(path)
        self.column = column
        super().__init__(f"{self.path}: missing column '{column}'")


class EmptyTextError(InputError):
    code = "EmptyText"

    def __init__(self, path: str | Path, row: int):
        self.path = str(path)
        self.row = row
        super().__init__(f"{self.path} row {row}: requirement text is empty")


class UnknownCweIdError(InputError):
    code = "UnknownCweId"

    def __init__(self, cwe_id: int):
        self.cwe_id = cwe_id
        super().__init__(f"CWE id {cwe_id} is not in the catalog")


class UncategorizedError(InputError):
    code = "Uncategorized"

    def __init__(self, cwe_id: int):
        self.cwe_id = cwe_id
        super().__init__(f"CWE id {cwe_id} belongs to no category")


# Text pipeline and LSA


class EmptyCorpusError(InputError):
    code = "EmptyCorpus"


class EmptyVocabularyError(InputError):
    code = "EmptyVocabulary"


class RankTooLargeError(InputError):
    code = "RankTooLarge"

    def __init__(self, k: int, limit: int):
        self.k = k
        self.limit = limit
        super().__init__(f"rank k={k} outside 1..{limit}")


class ZeroMatrixError(InputError):
    code = "ZeroMatrix"


class DimensionMismatchError(InputError):
    code = "DimensionMismatch"

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"expected dimension {expected}, got {actual}")


# Artifacts


class RefuseOverwriteError(InputError):
    code = "RefuseOverwrite"

    def __init__(self, path: str | Path):
        self.path = str(path)
        super().__init__(f"refusing to overwrite existing output {self.path} (use --force)")


class SchemaMismatchError(InputError):
    code = "SchemaMismatch"

    def __init__(self, path: str | Path, column: str):
        self.path = str(path)
        self.column = column
        super().__init__(f"{self.path}: training-set column '{column}' missing or unexpected")


class ArtifactIoError(InputError):
    code = "IoError"


class VersionMismatchError(InputError):
    code = "VersionMismatch"


# Classifiers and evaluation


class DegenerateLabelsError(InputError):
    code = "DegenerateLabels"


class NegativeOrNonCountFeaturesError(InputError):
    code = "NegativeOrNonCountFeatures"


class NonFiniteFeaturesError(InputError):
    code = "NonFiniteFeatures"


class TooFewExamplesError(InputError):
    code = "TooFewExamples"


class LengthMismatchError(InputError):
    code = "LengthMismatch"

    def __init__(self, left: int, right: int):
        self.left = left
        self.right = right
        super().__init__(f"length mismatch: {left} != {right}")


class EmptyInputError(InputError):
    code = "EmptyInput"


class UnknownAlgorithmError(InputError):
    code = "UnknownAlgorithm"

    def __init__(self, name: str, valid: list[str]):
        self.name = name
        self.valid = valid
        super().__init__(f"unknown algorithm '{name}'; valid names: {', '.join(valid)}")


class ConfigError(InputError):
    code = "ConfigError"

"""Exception hierarchy.

``UsageError`` subclasses signal bad arguments (CLI exit code 1);
``DataError`` subclasses signal bad input files or data (exit code 2).
"""


class SoftwrapError(Exception):
    pass


class UsageError(SoftwrapError, ValueError):
    pass


class DataError(SoftwrapError):
    pass


class BadFractions(UsageError):
    pass


class BadArguments(UsageError):
    pass


class BadConfig(UsageError):
    pass


class BadRange(UsageError):
    pass


class NotContinuousFeature(UsageError):
    pass


class LengthMismatch(UsageError):
    pass


class Empty(UsageError):
    pass


class ZeroWeight(UsageError):
    pass


class InconsistentWeights(UsageError):
    pass


class SchemaError(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"missing column {column!r}")
        self.column = column


class UnparsableValue(DataError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r}")
        self.row, self.column, self.value = row, column, value


class UnknownCategory(DataError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}, column {column!r}: unknown category {value!r}")
        self.row, self.column, self.value = row, column, value


class EmptyFile(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class ArityMismatch(DataError):
    pass


class InsufficientData(DataError):
    pass


class EmptyCalibrationSet(DataError):
    pass


class FormatVersionMismatch(DataError):
    pass


class CorruptModel(DataError):
    pass


class NoValidSplit(SoftwrapError):
    pass


class DegenerateLeaves(SoftwrapError):
    pass

"""Exception hierarchy.

Two families matter to the CLI: ``DataError`` (bad input, exit code 2) and
``StatisticalError`` (constraint or numerical failure, exit code 3).
"""


class FacadeBNError(Exception):
    """Base class for all toolkit errors."""


class DataError(FacadeBNError):
    pass


class StatisticalError(FacadeBNError):
    pass


class SchemaMismatch(DataError):
    pass


class InvalidLevel(DataError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: {value!r} is not a declared level")


class MissingValue(DataError):
    def __init__(self, row, column):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: missing value")


class EmptyDataset(DataError):
    pass


class UnknownVariable(DataError):
    pass


class MalformedModelString(DataError):
    pass


class CycleDetected(StatisticalError):
    pass


class DuplicateArc(StatisticalError):
    pass


class GenerationExhausted(StatisticalError):
    pass


class DomainError(StatisticalError):
    pass


class ZeroProbabilityEvidence(StatisticalError):
    pass


class UnsupportedConfiguration(StatisticalError):
    pass


class NoData(DataError):
    pass


class ConstantTrace(StatisticalError):
    pass


class DegenerateChains(StatisticalError):
    pass

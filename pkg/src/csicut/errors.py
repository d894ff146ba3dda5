"""Exception hierarchy.

Every error raised on bad input derives from :class:`DataError`, which the CLI
maps to exit status 2. Programming errors are left as plain Python exceptions.
"""


class CsiCutError(Exception):
    """Root of all toolkit errors."""


class DataError(CsiCutError, ValueError):
    """Input data or parameters violate an operation's preconditions."""


# dataset
class MissingColumn(DataError):
    def __init__(self, column):
        super().__init__(f"missing required column {column!r}")
        self.column = column


class ParseError(DataError):
    def __init__(self, row, column, value):
        super().__init__(f"row {row}: cannot parse {column}={value!r}")
        self.row = row
        self.column = column


class RangeViolation(DataError):
    def __init__(self, row, field, value, bounds):
        lo, hi = bounds
        super().__init__(f"row {row}: {field}={value} outside [{lo}, {hi}]")
        self.row = row
        self.field = field


class EmptyCohort(DataError):
    pass


class InvalidProfile(DataError):
    pass


# preprocess
class ConstantColumn(DataError):
    def __init__(self, name):
        super().__init__(f"column {name!r} has zero variance")
        self.name = name


class TooFewRows(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class DecompositionFailure(CsiCutError):
    pass


class DimensionMismatch(DataError):
    pass


# clustering
class KOutOfRange(DataError):
    pass


class DegenerateInput(DataError):
    pass


class EmptyInput(DataError):
    pass


class InvalidParams(DataError):
    pass


# validity
class SingleCluster(DataError):
    pass


class CoincidentCentroids(DataError):
    pass


class DegenerateDispersion(DataError):
    pass


class EmptyReportList(DataError):
    pass


# diagnostics
class NotThreeClusters(DataError):
    pass


class AmbiguousClusters(DataError):
    pass


class EmptyGroup(DataError):
    pass


class EmptyTable(DataError):
    pass


class EmptySample(DataError):
    pass


class UnknownVariable(DataError):
    pass


# pipeline
class ReportIOError(CsiCutError, OSError):
    pass


class StageError(CsiCutError):
    """Wraps an error with the pipeline stage it occurred in."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause

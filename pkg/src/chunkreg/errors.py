"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`ChunkregError`.  The two branches map onto the CLI exit codes:
:class:`DataError` (exit 2) for bad inputs, shapes and parameter domains,
:class:`NumericalError` (exit 3) for failed factorizations and degenerate
statistics.
"""

from __future__ import annotations


class ChunkregError(Exception):
    """Base class for all package errors."""

    #: iteration index of a Gibbs sweep when the error was raised inside one
    iteration: int | None = None


class DataError(ChunkregError, ValueError):
    """Invalid input data, shape, file or parameter."""


class ShapeError(DataError):
    """Array dimensions disagree with what an operation expects."""


class IncompatibleSummariesError(DataError):
    """Two summary-statistic bundles cannot be combined."""


class ParseError(DataError):
    """A delimited input file has a field that cannot be used."""

    def __init__(self, source: str, row: int, column: int, reason: str):
        self.source = source
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"{source}: row {row}, column {column}: {reason}")


class SchemaError(DataError):
    """A persisted file is corrupt, truncated or of an unknown version."""


class SymmetryError(SchemaError):
    """A persisted XtX matrix is not exactly symmetric."""


class DomainError(DataError):
    """A distribution or summary parameter lies outside its domain."""


class NumericalError(ChunkregError, ArithmeticError):
    """A numerical procedure failed."""


class FactorizationError(NumericalError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot: int, what: str = "matrix"):
        self.pivot = pivot
        super().__init__(
            f"{what} is not positive definite: Cholesky pivot {pivot} is not positive"
        )


class RankDeficiencyError(NumericalError):
    """XtX is singular, so the flat-prior posterior is improper."""


class InconsistentStatisticsError(NumericalError):
    """Summary statistics imply a negative residual sum of squares."""


class DegenerateDataError(NumericalError):
    """Statistics leave a conditional distribution without a valid rate."""


def tag_iteration(err: ChunkregError, iteration: int) -> ChunkregError:
    """Attach a Gibbs iteration index to ``err`` and prefix its message."""
    err.iteration = iteration
    if err.args:
        err.args = (f"iteration {iteration}: {err.args[0]}",) + tuple(err.args[1:])
    else:
        err.args = (f"iteration {iteration}",)
    return err

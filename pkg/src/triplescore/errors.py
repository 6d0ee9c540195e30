"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TripleScoreError(Exception):
    """Base class for all package errors."""


class DataFormatError(TripleScoreError):
    """Malformed or out-of-contract input data (CLI exit code 2)."""


class SentenceParseError(DataFormatError):
    """Unbalanced mention brackets in a corpus sentence."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MetricUndefinedError(TripleScoreError):
    """A metric has no defined value on the given input."""


class TrainingError(TripleScoreError):
    """Model training could not proceed or did not converge."""


class InvariantError(TripleScoreError):
    """Internal invariant violated; indicates a pipeline bug (exit code 3)."""

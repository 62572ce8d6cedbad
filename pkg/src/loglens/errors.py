"""Exception types shared across the engine.

Fatal conditions raise one of the classes below; recoverable row-level
problems (malformed rows, unparseable timestamps, unlabeled entities) are
counted in batch statistics instead of raising.
"""

from __future__ import annotations


class LogLensError(Exception):
    """Base class for all engine errors."""


class MissingFile(LogLensError):
    """An input path does not exist or is not readable."""


class LabelFileMissing(LogLensError):
    """A sidecar label file referenced by an adapter is absent."""


class BadPattern(LogLensError):
    """A user-supplied regular expression failed to compile."""

    def __init__(self, position: int, pattern: str, reason: str):
        self.position = position
        self.pattern = pattern
        super().__init__(f"pattern {position} ({pattern!r}) failed to compile: {reason}")


class MissingTimestamps(LogLensError):
    """An operation needs timestamps but some records lack them."""


class MissingEntityIds(LogLensError):
    """Identifier partitioning requires entity ids on every record."""


class EmptyCorpus(LogLensError):
    """A vectorizer or parser was given no documents."""


class UnknownField(LogLensError):
    """A configured field name does not exist on the record model."""


class KTooLarge(LogLensError):
    """More clusters requested than there are points."""


class EmptyMatrix(LogLensError):
    """A detector or clusterer was given a matrix with no rows."""


class TooFewRows(LogLensError):
    """Not enough rows to fit the requested model."""


class SupportMismatch(LogLensError):
    """Two distributions being compared have different supports."""


class InfiniteKL(LogLensError):
    """KL divergence is undefined because q has a zero where p does not."""


class SeriesTooShort(LogLensError):
    """A time series is shorter than the configured warmup."""


class EmptyTraining(LogLensError):
    """A sequence model was fit on no sequences."""


class UnknownAllContexts(LogLensError):
    """A next-event model has no counts at any context length."""


class LengthMismatch(LogLensError):
    """Paired inputs (labels and scores, ids and labels) differ in length."""


class SingleClass(LogLensError):
    """A ranking metric needs both classes present."""


class UnknownJob(LogLensError):
    """A job id does not exist in the service workspace."""


class SpecValidation(LogLensError):
    """A job spec failed validation; carries one message per bad field."""

    def __init__(self, field_errors: list[str]):
        self.field_errors = list(field_errors)
        super().__init__("; ".join(self.field_errors))

"""Exception types raised by :mod:`seasolr`.

Everything here subclasses ``ValueError`` so callers that only care about "bad
input" can keep catching the built-in type; the extra attributes carry the
detail the CLI prints.
"""

from __future__ import annotations

from typing import Sequence


class InvalidSeriesError(ValueError):
    """Raised when raw observations cannot form an :class:`OrdinalSeries`.

    Attributes:
        rows: Zero-based row indices (or CSV line numbers when raised by the
            CSV reader) of the offending entries.
    """

    def __init__(self, message: str, rows: Sequence[int] = ()):
        super().__init__(message)
        self.rows = list(rows)


class RankDeficientDesignError(ValueError):
    """Raised when design columns are collinear with earlier columns or the thresholds.

    Attributes:
        columns: Names of the columns that add no rank.
    """

    def __init__(self, columns: Sequence[str]):
        super().__init__(
            "Design matrix is rank deficient; collinear column(s): "
            + ", ".join(columns)
        )
        self.columns = list(columns)


class MissingFestivalDateError(ValueError):
    """Raised when a festival-window indicator is needed for an unconfigured year."""

    def __init__(self, year: int):
        super().__init__(
            f"No festival date configured for {year}; add it to calendar.festivals."
        )
        self.year = year


class UndefinedMeasureError(ValueError):
    """Raised when an association measure has a zero denominator."""

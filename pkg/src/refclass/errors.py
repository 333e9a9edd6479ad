"""Exception hierarchy shared across the toolkit.

Every error raised on purpose derives from RefclassError so the CLI can map
failures onto its exit-code contract in one place.
"""

from __future__ import annotations


class RefclassError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(RefclassError):
    """A source file is malformed: bad header, bad cell, bad structure."""


class RecordConsistencyError(DataFormatError):
    """A parsed record violates a registry invariant (violations are fatal
    in strict parsing; the lenient path reports them as data instead)."""


class DeflatorCoverageError(RefclassError):
    """A requested year falls outside the deflator series."""


class EmptyClassError(RefclassError):
    """A reference class has no observations after filtering."""


class InsufficientDataError(RefclassError):
    """Too few observations for the requested analysis."""


class NonMonotoneCurveError(RefclassError):
    """An uplift curve is not non-decreasing where monotonicity is required."""

"""Exception hierarchy.

Every failure mode that can poison a downstream residual check raises
loudly; nothing in this package returns a silently-degraded value.
"""

from __future__ import annotations


class FracmixError(Exception):
    """Base class for all package errors."""


class ValidationError(FracmixError, ValueError):
    """Inputs violate a documented precondition (domain, range, shape)."""


class AccuracyError(FracmixError, RuntimeError):
    """A requested tolerance could not be certified within the term/work caps."""


class ConsistencyError(FracmixError, RuntimeError):
    """Two mathematically equivalent internal computations disagree."""


class DegenerateGluingError(FracmixError, RuntimeError):
    """The per-mode interface system is numerically singular."""

    def __init__(self, message: str, table: list | None = None):
        super().__init__(message)
        self.table = table if table is not None else []


class TruncationError(FracmixError, ValueError):
    """A truncated-domain transform cannot meet the requested tail bound."""

    def __init__(self, message: str, minimal_s: float | None = None):
        super().__init__(message)
        self.minimal_s = minimal_s


class ConfigError(FracmixError, ValueError):
    """Run configuration is malformed; message carries the field path."""

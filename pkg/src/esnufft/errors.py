"""Stable error codes and the exceptions that carry them.

The core raises typed exceptions; every exception class owns a distinct
nonzero integer code (0 is reserved for success) so that thin wrappers can
surface C-style status ints without re-deriving the failure class.
"""

from __future__ import annotations

from enum import IntEnum


class ErrorCode(IntEnum):
    SUCCESS = 0
    BAD_TOLERANCE = 1
    BOUNDS_VIOLATION = 2
    SIZE_ERROR = 3
    RESOURCE_ERROR = 4
    DATA_ERROR = 5
    INTERNAL_ERROR = 6


class EsnufftError(Exception):
    """Base class; ``code`` is the stable status int for this failure class."""

    code = ErrorCode.INTERNAL_ERROR


class BadToleranceError(EsnufftError, ValueError):
    """Requested tolerance or kernel parameter outside the supported range."""

    code = ErrorCode.BAD_TOLERANCE


class BoundsViolationError(EsnufftError, ValueError):
    """Point coordinates outside the accepted input interval."""

    code = ErrorCode.BOUNDS_VIOLATION


class SizeError(EsnufftError, ValueError):
    """Inconsistent or unusable array sizes / mode counts."""

    code = ErrorCode.SIZE_ERROR


class ResourceError(EsnufftError, RuntimeError):
    """A working array would exceed the configured memory cap."""

    code = ErrorCode.RESOURCE_ERROR


class DataError(EsnufftError, ValueError):
    """Non-finite strengths or coordinates; message identifies the index."""

    code = ErrorCode.DATA_ERROR


class InternalError(EsnufftError, RuntimeError):
    """An internal consistency check failed (library bug, not user error)."""

    code = ErrorCode.INTERNAL_ERROR

"""Shared constants and errors."""

from .errors import (
    MaternCardinalError, DomainError, AccuracyError, UsageError,
)

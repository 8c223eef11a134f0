"""Exception hierarchy shared across the package.

Errors are split along the lines the CLI cares about: validation problems
(exit code 1), provider/transport problems (exit code 2), and partial batch
failures (exit code 3).
"""

from __future__ import annotations


class CpSearchError(Exception):
    """Base class for all package errors."""


class ValidationError(CpSearchError):
    """Input violates an invariant (bad id, empty file, wrong dimension...)."""


class IngestionError(CpSearchError):
    """Corpus directory cannot be read."""


class ConflictError(CpSearchError):
    """Attempt to add an entry whose id already exists."""


class NotFoundError(CpSearchError):
    """Referenced file or entry does not exist."""


class SchemaError(CpSearchError):
    """Persisted file has an unknown or inconsistent schema."""


class ConfigurationError(CpSearchError):
    """An index configuration requires data the entry does not have."""


class LooViolationError(CpSearchError):
    """Query set and index configuration pair excluded by leave-one-out."""


class GenerationError(CpSearchError):
    """Text-generation provider returned unusable output."""


class ProviderError(CpSearchError):
    """Transport-level provider failure. Retriable; carries attempt count."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class ProviderContractError(CpSearchError):
    """Provider responded, but violated its contract (e.g. wrong dimension)."""


class PartialFailureError(CpSearchError):
    """A batch completed with some per-item failures.

    ``failures`` maps the failing item id to a human-readable reason.
    """

    def __init__(self, message: str, failures: dict[str, str]):
        super().__init__(message)
        self.failures = failures

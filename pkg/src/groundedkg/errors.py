"""Exception hierarchy shared across the package."""


class GroundedKgError(Exception):
    """Base class for all errors raised by this package."""


class PenmanParseError(GroundedKgError):
    """Malformed PENMAN input. Carries 1-based line/column of the offending token."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class BundleError(GroundedKgError):
    """Parse-bundle file is missing, unreadable, or violates the record schema."""


class GraphError(GroundedKgError):
    """Graph construction or validation failure."""


class IndexError_(GroundedKgError):
    """Node index construction, persistence, or query failure."""


class RetrievalError(GroundedKgError):
    """Retrieval pipeline failure (empty index, scheme mismatch, bad params)."""


class ProviderError(GroundedKgError):
    """Embedding provider failure (transport, cache miss, dimension mismatch)."""


class LlmError(GroundedKgError):
    """LLM completion failure after retries. ``status`` is the HTTP status if known."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ConfigError(GroundedKgError):
    """Invalid configuration (bad URL, out-of-range parameter, missing path)."""


class EvalError(GroundedKgError):
    """Metric evaluation failure (empty result set, malformed results file)."""

"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Input shape does not match what a sketch or kernel expects."""


class ParameterError(ValueError):
    """Invalid construction parameter (non-positive dim, even filter, ...)."""


class DomainError(ValueError):
    """Scalar argument outside the admissible interval."""


class ZeroInputError(ValueError):
    """Operation requires a nonzero input vector (it divides by the norm)."""


class DatasetFormatError(ValueError):
    """Malformed dataset file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyDatasetError(ValueError):
    """Dataset file contained no samples."""


class FeatureFormatError(ValueError):
    """Corrupt or truncated feature-matrix file."""


class SolveError(RuntimeError):
    """Ridge system could not be solved; advise a positive regularizer."""

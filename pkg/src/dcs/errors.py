"""Exception hierarchy shared across the library.

The CLI maps these onto process exit codes; library callers catch them
directly.
"""


class DcsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(DcsError):
    """Invalid hyperparameter, descriptor, or run configuration."""


class DimensionError(ConfigurationError):
    """Tensor or batch shapes do not line up; message names both shapes."""


class DataError(DcsError):
    """Malformed dataset content (bad label, bad file line, ...)."""


class NumericalAbort(DcsError):
    """A training loss went non-finite; carries epoch/batch diagnostics."""


class PersistenceError(DcsError):
    """Checkpoint or results file could not be read or written."""

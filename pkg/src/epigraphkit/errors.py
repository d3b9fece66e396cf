"""Shared exception types."""


class EpigraphkitError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EpigraphkitError):
    """A configuration value is out of range or inconsistent."""


class EmptyGlcmError(EpigraphkitError):
    """A co-occurrence matrix has zero pairs (offset incompatible with kernel size)."""


class EigenSolverError(EpigraphkitError):
    """The eigenvalue solver failed to converge; carries the offending matrix."""

    def __init__(self, message: str, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class ShapeError(EpigraphkitError):
    """Array dimensions do not chain consistently."""


class DivergenceError(EpigraphkitError):
    """Training produced a non-finite cost; carries the iteration index."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class ModelFormatError(EpigraphkitError):
    """A serialized model file is malformed or has an unsupported version."""

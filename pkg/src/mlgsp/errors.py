"""Exception types shared across the package."""


class MlgError(Exception):
    """Base class for all package errors."""


class ShapeError(MlgError, ValueError):
    """Array dimensions do not conform to the operation."""


class InvalidGraphError(MlgError, ValueError):
    """A tensor or graph violates the multilayer-graph invariants."""


class InvalidParameterError(MlgError, ValueError):
    """A user-supplied parameter is out of range."""


class MlgIOError(MlgError, OSError):
    """A file is missing, unreadable, or malformed."""

"""Exception hierarchy shared by all modules."""


class MLIDError(Exception):
    """Base class for every error raised by this package."""


class InputError(MLIDError, ValueError):
    """Malformed or inconsistent input (bad file, failed precondition)."""


class ComputationError(MLIDError, RuntimeError):
    """A computation could not produce a valid result (e.g. non-finite loss)."""

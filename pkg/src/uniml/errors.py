"""Exception types shared across the library."""


class UnimlError(Exception):
    """Base class for library-specific errors."""


class DataFormatError(UnimlError):
    """A data file could not be parsed.

    Carries the file path and, where it applies, the 1-based line number
    of the offending line.
    """

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        self.message = message
        if line is None:
            super().__init__(f"{self.path}: {message}")
        else:
            super().__init__(f"{self.path}:{line}: {message}")


class ModelFormatError(UnimlError):
    """A model file has an unknown header, version, or malformed payload."""


class NotTrainedError(UnimlError):
    """classify was called on a classifier that has not been trained."""


class NonFiniteError(UnimlError):
    """An objective or gradient evaluation produced NaN or infinity."""

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)

"""Exception hierarchy shared by every module."""


class SpacsimError(Exception):
    """Base class for all library errors."""


class InvalidDimensionError(SpacsimError, ValueError):
    """A truncation dimension is too small to hold |0> and |1>."""


class InvalidArgumentError(SpacsimError, ValueError):
    pass


class OutOfRangeError(SpacsimError, IndexError):
    pass


class ShapeError(SpacsimError, ValueError):
    """Operator and state dimensions do not match."""


class PartialTraceRequiredError(ShapeError):
    """A single-mode analysis was given a multimode state."""


class TruncationError(SpacsimError, ValueError):
    """The truncated Fock space cannot represent the requested state faithfully."""


class NormLeakageError(SpacsimError, RuntimeError):
    """Population reached the truncation edge beyond the allowed budget."""


class ConfigError(SpacsimError, ValueError):
    """A scenario configuration is malformed.

    Attributes:
        field: dotted path of the offending field, if known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field

"""Exception hierarchy shared by every chronos module."""


class ChronosError(ValueError):
    """Base class for all chronos failures."""


class GridError(ChronosError):
    pass


class SupportError(ChronosError):
    """A state leaks probability mass out of the interior window."""


class ShapeError(ChronosError):
    pass


class SingularCommutatorError(ChronosError):
    pass


class PreconditionError(ChronosError):
    """A numerically verified precondition failed; ``residual`` carries the offending value."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ZeroDriftError(ChronosError):
    pass


class NonHermitianError(ChronosError):
    pass


class NormalizationError(ChronosError):
    pass


class ShiftRangeError(ChronosError):
    pass


class OffLatticeError(ChronosError):
    pass


class ConfigError(ChronosError):
    """Invalid experiment configuration; names the field at fault."""

    def __init__(self, field, reason):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason

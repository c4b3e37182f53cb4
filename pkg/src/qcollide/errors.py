"""Exception hierarchy.

Everything raised deliberately by the library derives from
:class:`CollisionError`. :class:`ConfigError` marks user input problems;
the CLI maps it to exit code 1 and every other subclass to exit code 2.
"""


class CollisionError(Exception):
    """Base class for library errors."""


class ConfigError(CollisionError, ValueError):
    """Invalid experiment configuration or parameters."""


class NumericError(CollisionError):
    """A numerical procedure failed or produced an invalid object."""


class SingularMatrix(NumericError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NoOpenChannel(NumericError):
    pass


class ThresholdEnergy(NumericError):
    pass


class UnitarityViolation(NumericError):
    pass


class AllGapsDegenerate(NumericError):
    pass


class QuadratureNotConverged(NumericError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class NotStochastic(NumericError):
    pass


class TraceDrift(NumericError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DimensionMismatch(NumericError):
    pass


class PopulationUnderflow(NumericError):
    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class DetailedBalanceViolated(NumericError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

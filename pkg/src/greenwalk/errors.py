"""Exception hierarchy shared by every module.

Errors fall in three families that the CLI maps onto exit codes:
parameter/domain problems (exit 2), simulation failures (exit 3) and
everything else.
"""


class GreenwalkError(Exception):
    """Base class for all package errors."""


class ParameterError(GreenwalkError, ValueError):
    """Inputs violate a precondition of the requested computation."""


class DegenerateTransform(ParameterError):
    pass


class UnsupportedMap(ParameterError):
    pass


class OutsideDomain(ParameterError):
    pass


class SourcePoint(ParameterError):
    pass


class OriginExcluded(ParameterError):
    pass


class SourceImage(ParameterError):
    pass


class NonpositiveTime(ParameterError):
    pass


class PoleInParameters(ParameterError):
    pass


class BiasedWindow(ParameterError):
    pass


class NonConverged(GreenwalkError, ArithmeticError):
    """A series or quadrature did not reach its tolerance."""


class SimulationError(GreenwalkError, RuntimeError):
    pass


class StepTooCoarse(SimulationError):
    pass

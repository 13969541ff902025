from typing import TypeVar

from gyver.detours.strings import sentence as _sentence

ExceptionT = TypeVar('ExceptionT', bound=Exception)


def sentence(exc_type: type[ExceptionT], message: str, *args) -> ExceptionT:
    """Add a period to the end of the message."""
    return exc_type(_sentence(message), *args)


class DetoursError(Exception):
    """Root of every error raised by gyver.detours."""


class DimensionMismatch(DetoursError, ValueError):
    pass


class ParseError(DetoursError, ValueError):
    pass


class MeasureError(DetoursError):
    pass


class NegativeWeight(MeasureError):
    pass


class EmptySupport(MeasureError):
    pass


class NonFiniteValue(MeasureError):
    pass


class WeightSumOutOfTolerance(MeasureError):
    pass


class NotOrthonormal(MeasureError):
    pass


class NotSymmetric(MeasureError):
    pass


class NotPositiveSemidefinite(MeasureError):
    pass


class TransportError(DetoursError):
    pass


class InfeasibleMarginals(TransportError):
    pass


class NumericalFailure(TransportError):
    pass


class NonFiniteEnergy(TransportError):
    pass


class SolverFailure(TransportError):
    pass


class EmptyConditional(TransportError):
    pass


class InvalidSchedule(TransportError, ValueError):
    pass


class GaussianError(DetoursError):
    pass


class SingularBlock(GaussianError):
    pass


class DegenerateCovariance(GaussianError):
    pass


class NotCentered(GaussianError):
    pass


class MeshError(DetoursError):
    pass


class IndexOutOfRange(MeshError):
    pass


class DisconnectedGraph(MeshError):
    pass


class ConvergenceFailure(MeshError):
    pass


class SizeMismatch(MeshError):
    pass


class DegenerateSpectrumWarning(UserWarning):
    """The Fiedler eigenvalue is repeated, so the Fiedler embedding is not unique."""

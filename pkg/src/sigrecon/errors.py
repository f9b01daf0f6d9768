"""Exception hierarchy shared by every module in the package."""


class ReconError(Exception):
    """Base class for all package errors."""


class PriorError(ReconError, ValueError):
    """A frequency prior violates one of its invariants."""


class NonNormalized(PriorError):
    pass


class OverlappingBands(PriorError):
    pass


class NonPositiveScale(PriorError):
    pass


class QuadratureNonConvergent(ReconError):
    pass


class AlphaTooSmall(ReconError, ValueError):
    pass


class DomainError(ReconError, ValueError):
    pass


class SolveFailure(ReconError):
    pass


class DimensionMismatch(ReconError, ValueError):
    pass


class EigensolveFailure(ReconError):
    pass


class DegenerateSpectrum(ReconError):
    pass


class OutOfRange(ReconError, ValueError):
    pass


class NonEquispaced(ReconError, ValueError):
    pass

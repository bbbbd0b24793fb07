"""Exception types raised by the solver suite."""


class PairwaveError(Exception):
    """Base class for all library errors."""


class InvalidConfiguration(PairwaveError, ValueError):
    pass


class InvalidInput(PairwaveError, ValueError):
    pass


class ConvergenceFailure(PairwaveError):
    """An iterative solver stopped without meeting its tolerance.

    The last residual and the iteration trace are kept on the exception so
    callers can still report partial progress.
    """

    def __init__(self, message, residual=float("nan"), trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = list(trace or [])


class GapConditionViolated(PairwaveError):
    def __init__(self, message, c_estimate=float("nan"), certificate=float("nan")):
        super().__init__(message)
        self.c_estimate = c_estimate
        self.certificate = certificate


class PerModeGapViolated(PairwaveError, ValueError):
    pass


class OutOfDomain(PairwaveError, ValueError):
    pass


class DomainError(PairwaveError, ValueError):
    pass


class DegenerateBasis(PairwaveError):
    pass


class DegeneracyError(PairwaveError):
    pass


class ResonanceError(PairwaveError):
    pass


class SizeCapExceeded(PairwaveError):
    pass


class DimensionMismatch(PairwaveError, ValueError):
    pass


class DependencyError(PairwaveError):
    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage

"""Exception hierarchy shared by all epicure modules."""


class EpicureError(Exception):
    """Base class for every error raised by epicure."""


class ValidationError(EpicureError, ValueError):
    """An input violates a documented invariant."""


class EmptyDistribution(ValidationError):
    pass


class AllIsolated(ValidationError):
    pass


class InvalidRange(ValidationError):
    pass


class InvalidSize(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ZeroDenominator(EpicureError, ZeroDivisionError):
    pass


class NonFinite(EpicureError, FloatingPointError):
    pass


class StepTooLarge(EpicureError):
    """Integration drifted outside the state simplex by more than the clamp band."""


class BelowThreshold(EpicureError):
    pass


class NoProgress(EpicureError):
    pass


class DegenerateCase(EpicureError):
    """psi1 == psi2: the two strains are indistinguishable."""


class InfeasibleRegime(EpicureError):
    pass


class MaxIterations(EpicureError):
    pass


class LineSearchFailure(EpicureError):
    pass


class TrivialRatioCase(EpicureError):
    """zeta1/gamma1 == zeta2/gamma2, excluded from switching analysis."""


class ParseError(EpicureError, ValueError):
    pass


class ConditioningWarning(UserWarning):
    """Threshold quantity is within a hair of 1 and Theta* is poorly conditioned."""

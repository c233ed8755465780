"""Exception hierarchy shared by every module.

Errors carry enough context to be printed verbatim by the CLI.
"""


class PadicError(Exception):
    """Base class for all library errors."""


class ContextMismatch(PadicError):
    pass


class InsufficientPrecision(PadicError):
    pass


class DivisionByIndistinguishableZero(PadicError):
    pass


class DegreeCapExceeded(PadicError):
    pass


class MemoryCapExceeded(PadicError):
    pass


class BasinConditionViolated(PadicError):
    pass


class ExtensionFieldRequired(PadicError):
    """Some roots lie in C_p but not in Q_p.

    ``found`` holds the Q_p-rational roots that were recovered, ``expected``
    the Newton count they fell short of.
    """

    def __init__(self, message, found=(), expected=None):
        super().__init__(message)
        self.found = list(found)
        self.expected = expected


class PoleInBall(PadicError):
    pass


class ZeroOrPoleInBall(PadicError):
    pass


class RadiusExceedsMu(PadicError):
    pass


class BranchOverlap(PadicError):
    pass


class SaturationNotReached(PadicError):
    pass


class NotFoundWithinPeriodCap(PadicError):
    pass


class EscapedCover(PadicError):
    pass


class OrbitEscapedOmega(PadicError):
    pass


class UniquenessViolation(PadicError):
    pass


class CriticalPointMeetsCover(PadicError):
    pass


class MembershipFailure(PadicError):
    """A map failed the N_{lambda,Omega} membership check on some ball."""

    def __init__(self, message, ball_index=None):
        super().__init__(message)
        self.ball_index = ball_index


class GOutsideCertifiedNeighborhood(PadicError):
    pass

"""Exception types raised across the package."""


class CFHError(Exception):
    """Base class for all package errors."""


class UnequalSides(CFHError, ValueError):
    pass


class InvalidN(CFHError, ValueError):
    pass


class InvalidWindow(CFHError, ValueError):
    pass


class SingularSample(CFHError, ValueError):
    pass


class DegenerateAngle(CFHError, ValueError):
    pass


class CenterTooClose(CFHError, ValueError):
    pass


class NotOrthogonal(CFHError, ValueError):
    pass


class UndefinedInvD(CFHError, ValueError):
    pass


class Unsupported(CFHError):
    pass


class PartialForm(CFHError):
    """Raised when only part of a closed form is available.

    The available part is attached as ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateRegion(CFHError):
    pass


class NonPositiveError(CFHError, ValueError):
    pass


class NoDegeneratePoint(CFHError):
    pass

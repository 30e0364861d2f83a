"""Exception hierarchy.

Every error raised by the library derives from :class:`ModLpError`, which is
itself a :class:`ValueError`, so callers can catch either.
"""


class ModLpError(ValueError):
    pass


class NonHermitian(ModLpError):
    pass


class NotPositive(ModLpError):
    pass


class InvalidExponent(ModLpError):
    pass


class NotMajorized(ModLpError):
    pass


class NotInSpace(ModLpError):
    pass


class NotFaithful(ModLpError):
    pass


class DomainViolation(ModLpError):
    pass


class ZeroVector(ModLpError):
    pass


class BudgetTooSmall(ModLpError):
    pass


class InvalidAlpha(ModLpError):
    pass


class NotAState(ModLpError):
    pass


class DimensionMismatch(ModLpError):
    pass


class InvalidChannel(ModLpError):
    pass


class ZeroFunctional(ModLpError):
    pass


class SupportViolation(ModLpError):
    pass


class IndeterminateGap(ModLpError):
    pass

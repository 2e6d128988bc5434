"""Exception hierarchy shared by all modules."""


class SIntegralError(Exception):
    """Base class for every error raised by this package."""


class DegenerateCurve(SIntegralError):
    pass


class BadReduction(SIntegralError):
    def __init__(self, q: int, message: str | None = None):
        self.q = q
        super().__init__(message or f"prime {q} is a prime of bad reduction")


class EvenCharacteristic(SIntegralError):
    def __init__(self, message: str = "q = 2 is not supported"):
        super().__init__(message)


class IdentityPoint(SIntegralError):
    pass


class NotIndependent(SIntegralError):
    pass


class PrecisionUnreachable(SIntegralError):
    pass


class PrecisionExhausted(SIntegralError):
    pass


class DivisionByIndistinguishableZero(PrecisionExhausted):
    pass


class NotInKernel(SIntegralError):
    pass


class InsufficientPrecision(SIntegralError):
    pass


class AllLogsVanish(SIntegralError):
    pass


class NeedLargerScale(SIntegralError):
    """The lattice criterion failed; retry with a larger C or mu."""


class NeedLargerC(NeedLargerScale):
    pass


class NeedLargerMu(NeedLargerScale):
    pass


class NonConvergence(SIntegralError):
    pass


class InvalidProblem(SIntegralError):
    pass

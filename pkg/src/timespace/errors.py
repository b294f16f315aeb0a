"""Exception hierarchy shared by all modules."""


class TimespaceError(Exception):
    """Base class for every error raised by this package."""


# linear algebra
class ZeroVector(TimespaceError):
    pass


class NullVector(TimespaceError):
    pass


class DegenerateForm(TimespaceError):
    pass


class NotTimelike(TimespaceError):
    pass


class NoConvergence(TimespaceError):
    pass


class WrongSignature(TimespaceError):
    def __init__(self, message, signature=None, point=None):
        super().__init__(message)
        self.signature = signature
        self.point = point


class NotRiemannian(WrongSignature):
    pass


class EigencountViolation(TimespaceError):
    pass


# expressions
class ExprError(TimespaceError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownFunction(ExprSyntaxError):
    pass


class UnboundVariable(ExprError):
    pass


class MathDomain(ExprError):
    pass


# spacetime specs
class SpecError(TimespaceError):
    pass


class ParseError(SpecError):
    pass


class UnknownCoordinate(SpecError):
    pass


class AsymmetricMetric(SpecError):
    pass


class ExcludedPoint(SpecError):
    pass


class LoopNotClosed(SpecError):
    pass


# transport / connection
class ResolutionExceeded(TimespaceError):
    pass


class DegenerateMetric(TimespaceError):
    pass

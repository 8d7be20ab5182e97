"""Exception hierarchy.

Every domain failure raised by the library derives from :class:`CurveLabError`.
The CLI reports the class name, so names are part of the public surface.
"""


class CurveLabError(Exception):
    """Base class for all domain errors."""


# curve models
class BadParameter(CurveLabError):
    pass


class NonConvex(CurveLabError):
    pass


class OffCurve(CurveLabError):
    pass


class WindowTooSmall(CurveLabError):
    pass


class OutOfDomain(CurveLabError):
    pass


# construction
class HeightOutOfRange(CurveLabError):
    pass


class DegenerateFigure(CurveLabError):
    pass


class ToleranceNotMet(CurveLabError):
    pass


class NoApexInWindow(CurveLabError):
    pass


class RootNotBracketed(CurveLabError):
    pass


# asymptotics
class BadGrid(CurveLabError):
    pass


class IllConditioned(CurveLabError):
    pass


# characterize
class EmptyGrid(CurveLabError):
    pass


class InsufficientSpread(CurveLabError):
    pass


class MissingThirdDerivative(CurveLabError):
    pass


class SingularAtOrigin(CurveLabError):
    pass


class NonPositiveSample(CurveLabError):
    pass


# ingest
class ParseError(CurveLabError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column


class TooFewPoints(CurveLabError):
    pass


class NotConvex(CurveLabError):
    pass


class WindowTooLarge(CurveLabError):
    pass

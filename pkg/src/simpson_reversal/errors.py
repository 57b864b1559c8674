"""Exception hierarchy.

Everything raised for bad input derives from :class:`ValidationError`, which
the CLI maps to exit status 1.  :class:`InfeasibleAtResolution` maps to 2.
"""


class SimpsonError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SimpsonError, ValueError):
    pass


class ZeroMargin(ValidationError):
    """A conditional probability was requested on an empty conditioning margin."""

    def __init__(self, message, stratum=None, margin=None):
        super().__init__(message)
        self.stratum = stratum
        self.margin = margin


class EmptyTable(ValidationError):
    pass


class EmptyStratifiedTable(ValidationError):
    pass


class NotBinaryStratifier(ValidationError):
    pass


class DegenerateSegment(ValidationError):
    pass


class ExtremeDependence(ValidationError):
    pass


class DegenerateMarginal(ValidationError):
    pass


class PriorNotNormalized(ValidationError):
    def __init__(self, message, deficit):
        super().__init__(message)
        self.deficit = deficit


class UnknownColumn(ValidationError):
    pass


class NonBinaryValue(ValidationError):
    def __init__(self, message, column=None, label=None):
        super().__init__(message)
        self.column = column
        self.label = label


class EmptyInput(ValidationError):
    pass


class TooManyStrata(ValidationError):
    pass


class InfeasibleAtResolution(SimpsonError):
    """No reversing split was found on the finest grid that was searched."""

    def __init__(self, message, level, step):
        super().__init__(message)
        self.level = level
        self.step = step

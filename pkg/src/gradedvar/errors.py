"""Exception hierarchy."""


class GradedVarError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(GradedVarError, ValueError):
    pass


class UnknownSymbolError(GradedVarError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DegreeError(GradedVarError, ZeroDivisionError):
    """A homotopy weight was requested on a component it cannot handle."""


class BidegreeError(GradedVarError, ValueError):
    pass


class NotClosedError(GradedVarError, ValueError):
    """Input to a homotopy operator is not closed; ``witness`` holds the obstruction."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParityError(GradedVarError, ValueError):
    pass


class TowerError(GradedVarError, ValueError):
    """A Noether tower is malformed, unverified, or of an unsupported shape."""


class UnsupportedShapeError(TowerError):
    pass


class ModelError(GradedVarError, ValueError):
    """Invalid model declaration or expression, with an optional source position."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        if self.line is None:
            return self.message
        return f"{self.line}:{self.column}: {self.message}"

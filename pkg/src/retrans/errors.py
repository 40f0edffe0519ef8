"""Exception types shared across the package."""


class RetransError(Exception):
    """Base class for all errors raised by retrans."""


class ParseError(RetransError, ValueError):
    """A distribution, Phi or config string could not be parsed."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ModelError(RetransError, ValueError):
    """A channel model failed validation; ``diagnostics`` lists the reasons."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(f"{d.code}: {d.message}" for d in self.diagnostics))


class NonConvergedError(RetransError, ArithmeticError):
    """Adaptive quadrature exhausted its evaluation budget."""


class CriticalBoundaryError(RetransError, ValueError):
    """A Phi specification sits exactly on a regime boundary."""

    code = "ON_CRITICAL_BOUNDARY"


class UnclassifiedError(RetransError, ValueError):
    """A Phi specification is outside the recognised grammar shapes."""

    code = "UNCLASSIFIED"


class UnsupportedRegimeError(RetransError, ValueError):
    """No delay-time predictor exists for the requested regime."""

    code = "UNSUPPORTED_REGIME"


class ScaleMismatchError(RetransError, ValueError):
    """A comparison was requested on a finer scale than the prediction supports."""


class InsufficientPointsError(RetransError, ValueError):
    """Too few usable points in a fitting window."""

    code = "INSUFFICIENT_POINTS"

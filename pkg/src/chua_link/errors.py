"""Exception hierarchy shared by all chua_link modules."""


class ChuaLinkError(Exception):
    """Base class. ``stage`` is filled in by the pipeline when it re-raises."""

    stage = None

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class DomainError(ChuaLinkError, ValueError):
    pass


class AmbiguityError(ChuaLinkError, ValueError):
    """Two NIC stages saturate at the same voltage, so the PWL is degenerate."""


class RegimeError(ChuaLinkError):
    """Parameters are not in the double-scroll configuration."""


class DivergenceError(ChuaLinkError, ArithmeticError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NumericalError(ChuaLinkError, ArithmeticError):
    pass


class AlignmentError(ChuaLinkError, ValueError):
    pass


class ConfigError(ChuaLinkError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key

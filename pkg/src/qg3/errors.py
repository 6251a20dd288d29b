"""Exception hierarchy shared by all qg3 modules."""


class QG3Error(Exception):
    """Base class for every error raised by qg3."""


class InvalidIndexError(QG3Error, ValueError):
    """A Gell-Mann index outside 1..8."""


class InvalidLabelError(QG3Error, ValueError):
    """A malformed basis label (bad sites, unsorted, duplicate)."""


class ValidationError(QG3Error, ValueError):
    """Input violates a numerical precondition.

    ``violation`` carries the measured defect (e.g. max |H - H^dagger|) when
    one is available.
    """

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class DimensionError(QG3Error, ValueError):
    """Operands have incompatible shapes or site counts."""


class GeodesicInstabilityError(QG3Error, RuntimeError):
    """Energy drift along an integrated geodesic exceeded the allowed limit."""

    def __init__(self, message, drift):
        super().__init__(message)
        self.drift = drift


class DegenerateSpectrumError(QG3Error, ValueError):
    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = gap

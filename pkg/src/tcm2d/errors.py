"""Exception types raised across the package."""


class TCMError(Exception):
    """Base class for all errors raised by tcm2d."""


class InvalidGrid(TCMError, ValueError):
    pass


class ShapeMismatch(TCMError, ValueError):
    pass


class GridMismatch(TCMError, ValueError):
    pass


class InvalidOrder(TCMError, ValueError):
    pass


class NonFinite(TCMError, FloatingPointError):
    pass


class UnresolvedCone(TCMError, ValueError):
    """The wavenumber lattice is too coarse (or too short) to represent the cone."""


class EpsilonTooLarge(TCMError, ValueError):
    pass


class SupportViolation(TCMError, ValueError):
    """A spectrum has nonzero coefficients outside the Fourier cone."""


class NotDivergenceFree(TCMError, ValueError):
    pass


class TimeMismatch(TCMError, ValueError):
    pass


class BlowUpDetected(TCMError, RuntimeError):
    pass


class InsufficientSamples(TCMError, ValueError):
    pass


class ParseError(TCMError, ValueError):
    pass


class ValidationError(TCMError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field

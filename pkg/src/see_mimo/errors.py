"""Exception types shared across the solver and simulation modules."""


class InvalidDimension(ValueError):
    """Antenna/user dimensions are incompatible with the requested precoder."""


class DegenerateDenominator(ArithmeticError):
    """A closed-form SINR denominator collapsed to zero."""


class UpdateSingular(ArithmeticError):
    """A power-update denominator is too close to zero to trust."""


class PerfectCsiUnsupported(ValueError):
    """The closed-form ZF power update divides by zero at delta = 1."""


class EmptyGroup(ValueError):
    """Cell division was requested but one of the two groups has no users."""


class NonPositiveTheta(ValueError):
    """The antenna-count rule needs a strictly positive efficiency value."""

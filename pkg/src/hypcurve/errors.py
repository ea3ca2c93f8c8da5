"""Exception hierarchy.

``InputError`` subclasses signal bad or unsupported input; ``NumericalError``
subclasses signal that a computation could not be completed reliably
(precision exhausted, genericity failure).  The CLI maps them to exit codes
2 and 3.
"""


class HypcurveError(Exception):
    pass


class InputError(HypcurveError, ValueError):
    pass


class NumericalError(HypcurveError, ArithmeticError):
    pass


class PrecisionExhausted(NumericalError):
    """A numerical decision could not be made at the current precision."""


class GenericityError(NumericalError):
    """The construction hit a degenerate configuration."""


class InconsistentInputError(InputError):
    pass

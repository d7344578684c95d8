"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); numerical
failures derive from :class:`NumericalError` (CLI exit code 3).
"""


class FluxsimError(Exception):
    """Base class for all package errors."""


class InputError(FluxsimError, ValueError):
    """Invalid parameters, malformed files or unknown labels."""


class NumericalError(FluxsimError, ArithmeticError):
    """A computation could not deliver a trustworthy result."""


class ConvergenceError(NumericalError):
    pass


class DegenerateLevelError(NumericalError):
    pass


class NearResonanceError(NumericalError):
    pass


class SingularJacobianError(NumericalError):
    pass

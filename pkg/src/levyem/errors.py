"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NumericalFailure(ArithmeticError):
    """A computation produced a non-finite value or failed to converge.

    ``chain`` and ``step`` locate the failure inside an ensemble run;
    ``achieved_error`` is set by quadrature routines that missed their target.
    """

    def __init__(self, message, *, chain=None, step=None, achieved_error=None):
        super().__init__(message)
        self.chain = chain
        self.step = step
        self.achieved_error = achieved_error

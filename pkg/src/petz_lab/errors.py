"""Exception hierarchy shared by the library and the CLI."""


class PetzLabError(Exception):
    """Base class for every error raised by petz_lab."""


class PreconditionError(PetzLabError, ValueError):
    """An input violated a documented precondition (shape, range, Hermiticity)."""


class NotPSDError(PreconditionError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class NumericalError(PetzLabError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class QuadratureError(NumericalError):
    """Adaptive quadrature hit its recursion cap or met a non-finite integrand."""


class DynamicsError(PetzLabError, ValueError):
    """A dynamics model produced an error probability outside [0, 1]."""

"""Exception hierarchy shared by all modules."""


class SkewSpecError(Exception):
    """Base class for errors raised by skewspec."""


class DomainError(SkewSpecError, ValueError):
    """Argument outside the domain of a function."""


class DegenerateParameterError(SkewSpecError, ValueError):
    """Parameter value at which a formula degenerates (e.g. mu = 1)."""


class ShapeError(SkewSpecError, ValueError):
    pass


class ValidationError(SkewSpecError, ValueError):
    pass


class NumericalError(SkewSpecError, ArithmeticError):
    pass


class QuadratureError(NumericalError):
    """Quadrature did not reach the requested tolerance."""


class ClassificationError(SkewSpecError):
    """Eigenvalues could not be split into real values and conjugate pairs."""


class SingularPointError(DomainError):
    pass


class PoleProximityError(DomainError):
    pass


class SingularMassError(NumericalError):
    """Coincident or ill-conditioned mass sets."""

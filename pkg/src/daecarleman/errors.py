"""Exception hierarchy shared by all modules."""


class CarlemanError(Exception):
    """Base class for every error raised by this package."""


class ModelError(CarlemanError, ValueError):
    """Malformed model document or expression."""


class ParseError(ModelError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class DomainError(CarlemanError, ArithmeticError):
    """Evaluation hit a singularity (division by zero, tan pole, overflow)."""


class ConvergenceError(CarlemanError, RuntimeError):
    """An iterative solver failed to converge."""


class RegularityError(CarlemanError, ArithmeticError):
    """The algebraic Jacobian dh/dz is singular, so z is not locally a function of x."""

    def __init__(self, message, det_H14=None):
        self.det_H14 = det_H14
        super().__init__(message)


class ShapeError(CarlemanError, ValueError):
    """Inconsistent matrix or basis dimensions."""

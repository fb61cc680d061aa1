"""Exception hierarchy shared by all modules."""


class RadialFracError(Exception):
    """Base class for library errors."""


class DocumentError(RadialFracError, ValueError):
    """A serialized document is malformed or incomplete."""


class PoleError(RadialFracError, ZeroDivisionError):
    """A constant was requested at a pole of its defining formula."""


class LogBranchError(RadialFracError, ValueError):
    """The power-kernel constant does not exist for order 1."""


class DivergentTailError(RadialFracError, ValueError):
    """An integral over the whole field diverges because of the tail model."""


class SingularPivotError(RadialFracError, ArithmeticError):
    def __init__(self, level, pivot, message=None):
        self.level = level
        self.pivot = pivot
        if message is None:
            message = f"singular pivot {pivot!r} at level {level}"
        super().__init__(message)


class NoConvergenceError(RadialFracError, RuntimeError):
    def __init__(self, iterations, last_norm):
        self.iterations = iterations
        self.last_norm = last_norm
        super().__init__(
            f"Picard iteration did not converge in {iterations} steps "
            f"(last difference {last_norm:.3e})"
        )

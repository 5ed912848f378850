"""Exception hierarchy shared by all modules."""


class ForwardIntError(Exception):
    """Base class for errors raised by :mod:`forwardint`."""


class InvalidArgumentError(ForwardIntError, ValueError):
    pass


class OutOfRangeError(ForwardIntError, IndexError):
    pass


class AlignmentError(ForwardIntError, ValueError):
    """The regularization shift 1/n is not a whole number of grid steps,
    or the grid lookahead does not cover it."""


class AdaptednessError(ForwardIntError, ValueError):
    """An Ito-type operation received a nonadapted integrand."""


class EvaluationError(ForwardIntError, ArithmeticError):
    """A process, multiplier or drift produced a non-finite value."""


class StabilityError(ForwardIntError, ArithmeticError):
    pass


class UnsupportedRegimeError(ForwardIntError, ValueError):
    """Multiplier singularity outside the range where convergence is known."""


class ConfigError(ForwardIntError, ValueError):
    """Malformed or invalid configuration.

    ``violations`` holds every problem found, so a caller can report them
    all at once instead of fixing one line at a time.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))

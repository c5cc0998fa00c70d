"""Exception types shared across the library and mapped to CLI exit codes."""


class DimensionMismatch(ValueError):
    """Operands live in different dimensions."""


class NotSpd(ValueError):
    """Matrix failed the symmetric-positive-definite check at construction."""


class SolverError(RuntimeError):
    """Inner solver diverged or could not certify its result.

    Carries the last residual seen so callers can report it.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoStrategy(SolverError):
    """No solver strategy is registered for this (function, operator) pairing."""


class EmptyOperatorValue(ValueError):
    """The operator has no value at the queried point (e.g. normal cone outside its box)."""


class StrongImplicitnessFailure(RuntimeError):
    """The gap between the two score functions is not positive at the unperturbed point."""


class UpdateUndefined(RuntimeError):
    """A scheme update would divide by a vanishing quantity."""


class InfeasibleProjection(SolverError):
    """The halfspace system handed to the projection is (numerically) infeasible."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field

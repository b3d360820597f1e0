"""Exception hierarchy shared by all modules."""


class GrowthboundError(Exception):
    """Base class for errors raised by growthbound."""


class DomainError(GrowthboundError, ValueError):
    """An argument lies outside the domain of the function (e.g. r >= 1)."""


class ArgumentError(GrowthboundError, ValueError):
    """An argument is malformed (too short, wrong kind, not a perfect square...)."""


class PreconditionError(GrowthboundError):
    """A documented precondition of an operation does not hold."""


class ConstructionError(GrowthboundError):
    """The envelope or series construction could not proceed."""


class NumericalInstabilityError(GrowthboundError):
    """A numerical procedure produced inconsistent results (e.g. zero counts)."""


class ConfigError(GrowthboundError):
    """Invalid run configuration; ``line`` points into the config file when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

"""Exception types shared across the package."""


class RepMarketError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RepMarketError):
    """An evaluation point lies outside the domain of a curve."""


class ConcavityViolation(RepMarketError):
    """A hydrogen production curve is not concave on its domain."""


class ModelError(RepMarketError):
    """A network or generator model is structurally invalid."""


class InfeasibleMarket(RepMarketError):
    """The market clearing problem has no feasible dispatch."""

    def __init__(self, message, hour=None):
        super().__init__(message)
        self.hour = hour


class NumericalFailure(RepMarketError):
    """The LP solver failed or returned an unreliable solution."""


class ParseError(RepMarketError):
    """An input file could not be parsed."""


class ValidationError(RepMarketError):
    """Scenario inputs are inconsistent with each other."""


class MissingFactor(RepMarketError):
    """A dispatched fuel has no emission factor configured."""

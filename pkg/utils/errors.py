"""Exception types shared by the pricing modules and the CLI."""


class PricingError(Exception):
    """Base class for every error raised by this package"""


class GameSpecError(PricingError, ValueError):
    """Malformed or invalid game/portfolio document or argument"""


class DomainError(PricingError, ValueError):
    """A logarithm argument payoff*t/u - t + 1 is not positive"""


class BracketError(PricingError, ValueError):
    """Price lies outside the interior bracket (h, E)"""


class NoSolutionError(PricingError):
    """Target growth e^r is unattainable on the price bracket"""


class ConvergenceError(PricingError):
    """Iteration cap reached before the tolerance was met"""


class InfeasibleBoxError(PricingError):
    """No vector in the unit box satisfies the accumulated cuts"""


class InvariantViolation(PricingError):
    """A structural property that must hold was observed to fail"""

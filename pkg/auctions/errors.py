"""Exception hierarchy shared by the auction modules."""
from __future__ import annotations


class AuctionError(Exception):
    """Base class for every error raised by the auctions package."""


class DomainError(AuctionError, ValueError):
    """An argument lies outside the domain of a cost model, rule or generator."""


class NumericalError(AuctionError, ArithmeticError):
    """Root finding, integration or bisection did not converge."""


class SupplyViolation(AuctionError, AssertionError):
    """More than k units of an item were allocated under a supply-k cost."""


class UnsupportedRule(AuctionError, ValueError):
    """No competitive guarantee is known for this rule/cost pairing."""


class TooLarge(AuctionError, ValueError):
    """An instance or search space exceeds a configured cap."""


class InconsistentTrace(AuctionError, ValueError):
    """A recorded trace disagrees with a recomputation from its instance and rule."""


class ReportError(AuctionError, OSError):
    """A report file could not be written."""

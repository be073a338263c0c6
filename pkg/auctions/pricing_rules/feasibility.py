"""Pointwise checks of the fractional and integral pricing inequalities."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from auctions.cost_models.models import StepSupplyCost
from auctions.errors import DomainError
from auctions.pricing_rules.rules import PricingRule
from auctions.settings import REL_TOL

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    alpha: float
    beta: float
    worst_slack: float
    worst_point: float
    y_checked_max: float
    # the inequality is only ever checked up to y_checked_max
    tail_verified: bool = False


def check_eq1(rule: PricingRule, alpha: float, beta: float, y_grid: Sequence[float]) -> FeasibilityVerdict:
    """Check  int_0^y p - f(y) >= f*(p(y))/alpha - beta  at every grid point.

    The integral is the trapezoid rule over the same grid (prefixed with 0 when
    the grid starts later). Slack is normalised by max(1, |rhs|).
    """
    if not alpha >= 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    grid = np.asarray(y_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("y_grid must be a non-empty list of quantities")
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise DomainError("y_grid must be sorted and nonnegative")
    if grid[0] > 0:
        grid = np.concatenate(([0.0], grid))

    prices = np.asarray(rule.price(grid), dtype=float)
    if np.any(np.diff(prices) < 0):
        raise DomainError(f"rule {rule.name} is not monotone on the grid")

    revenue = cumulative_trapezoid(prices, grid, initial=0.0)
    lhs = revenue - np.asarray(rule.cost.f(grid), dtype=float)
    conj = np.array([rule.cost.conjugate(float(p)) for p in prices])
    rhs = conj / alpha - beta

    slack = (lhs - rhs) / np.maximum(1.0, np.abs(rhs))
    i = int(np.argmin(slack))
    verdict = FeasibilityVerdict(
        feasible=bool(slack[i] >= -REL_TOL),
        alpha=float(alpha),
        beta=float(beta),
        worst_slack=float(slack[i]),
        worst_point=float(grid[i]),
        y_checked_max=float(grid[-1]),
    )
    logger.debug("eq1 %s alpha=%g beta=%g -> worst slack %.3g at y=%g", rule.name, alpha, beta, slack[i], grid[i])
    return verdict


def check_eq2_step(rule: PricingRule, alpha: float, y_before: int) -> bool:
    """p(y) - (f(y+1) - f(y)) >= (f*(p(y+1)) - f*(p(y))) / alpha  for one unit step."""
    if int(y_before) != y_before or y_before < 0:
        raise DomainError(f"y_before must be a nonnegative integer, got {y_before}")
    y = int(y_before)
    cost = rule.cost
    if isinstance(cost, StepSupplyCost) and y >= cost.k:
        raise DomainError(f"no unit is sold past the supply boundary k={cost.k} (y_before={y})")

    p_now, p_next = float(rule.price(float(y))), float(rule.price(float(y + 1)))
    lhs = p_now - (float(cost.f(float(y + 1))) - float(cost.f(float(y))))
    rhs = (cost.conjugate(p_next) - cost.conjugate(p_now)) / alpha
    return lhs >= rhs - REL_TOL * max(1.0, abs(rhs))


def check_eq2_range(rule: PricingRule, alpha: float, y_from: int, y_to: int) -> List[int]:
    """Integers in [y_from, y_to] where check_eq2_step fails."""
    if isinstance(rule.cost, StepSupplyCost):
        y_to = min(y_to, rule.cost.k - 1)
    return [y for y in range(int(y_from), int(y_to) + 1) if not check_eq2_step(rule, alpha, y)]

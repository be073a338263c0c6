"""Competitive ratios: closed-form guarantees per rule and a numerical estimate of alpha(f)."""
from __future__ import annotations

import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from auctions.cost_models.gamma import DEFAULT_Y_MAX, gamma_quantities
from auctions.cost_models.models import CostModel, LinearMarginalCost, LogMarginalCost, PowerCost, StepSupplyCost
from auctions.errors import DomainError, NumericalError, UnsupportedRule
from auctions.pricing_rules.rules import (
    ConcaveIntegral,
    ExponentialSupply,
    PowerRule,
    PricingRule,
    UnifiedFractional,
    UnifiedIntegral,
)

logger = logging.getLogger(__name__)

BISECTION_BRACKET = (1.0, 64.0)
BISECTION_ITERATIONS = 40
ODE_RTOL = 1e-8
ODE_ATOL = 1e-12
CERTIFICATE_POINTS = 2000


class Guarantee(NamedTuple):
    alpha: float
    beta: float  # per item
    ratio: float  # multiplicative factor in W >= OPT/ratio (- m*beta unless ratio != alpha)


def power_alpha(gamma: float) -> float:
    """(gamma+1)^((gamma+1)/gamma), the optimal ratio for f(y) = a*y^(gamma+1)."""
    return (gamma + 1.0) ** ((gamma + 1.0) / gamma)


def poly_marginal_alpha(d: int, epsilon: float) -> float:
    """(1+eps)(1+1/d)^(d+1)*d for marginal cost c(y) = a*y^d, large y."""
    return (1.0 + epsilon) * (1.0 + 1.0 / d) ** (d + 1) * d


def _has_concave_marginal(cost: CostModel) -> bool:
    return isinstance(cost, (LinearMarginalCost, LogMarginalCost)) or (
        isinstance(cost, PowerCost) and cost.gamma == 1
    )


def _integral_beta(cost: CostModel, alpha: float, epsilon: float, reach: float) -> float:
    """f*(f'(reach))/alpha + f(1/eps - 1): the start-up cost of the integral guarantees."""
    return cost.conjugate(float(cost.f_prime(reach))) / alpha + float(cost.f(1.0 / epsilon - 1.0))


def guaranteed_alpha(rule: PricingRule, epsilon: float = 0.1, y_max: Optional[float] = None) -> Guarantee:
    """The proven (alpha, per-item beta) of ``rule`` against its cost."""
    cost = rule.cost
    y_max = DEFAULT_Y_MAX if y_max is None else y_max
    if rule.integral and not isinstance(rule, ExponentialSupply) and not epsilon > 0:
        raise DomainError(f"integral guarantees need epsilon > 0, got {epsilon}")
    if isinstance(cost, StepSupplyCost) and not isinstance(rule, ExponentialSupply):
        raise UnsupportedRule(f"no guarantee for {rule.name} under a supply-k cost")

    if isinstance(rule, PowerRule):
        base = power_alpha(cost.gamma)  # type: ignore[attr-defined]
        if not rule.use_integral:
            return Guarantee(base, 0.0, base)
        alpha = (1.0 + epsilon) ** cost.gamma * base  # type: ignore[attr-defined]
        return Guarantee(alpha, _integral_beta(cost, alpha, epsilon, 2.0 / epsilon), alpha)

    if isinstance(rule, UnifiedFractional):
        report = gamma_quantities(cost, rule.lam, tau=1.0, y_max=y_max)
        alpha = rule.lam**2 / (rule.lam - 1.0) * report.gamma_times
        return Guarantee(alpha, 0.0, alpha)

    if isinstance(rule, ConcaveIntegral):
        if not _has_concave_marginal(cost):
            raise UnsupportedRule(f"concave-integral pricing needs a concave marginal, got {cost.kind}")
        alpha = 4.0 * (1.0 + epsilon)
        return Guarantee(alpha, _integral_beta(cost, alpha, epsilon, 2.0 / epsilon), alpha)

    if isinstance(rule, UnifiedIntegral):
        lam = rule.lam
        report = gamma_quantities(cost, lam, tau=lam / epsilon, y_max=y_max)
        alpha = (1.0 + epsilon) * lam**2 / (lam - 1.0) * report.gamma_plus * report.gamma_times
        return Guarantee(alpha, _integral_beta(cost, alpha, epsilon, lam / epsilon), alpha)

    if isinstance(rule, ExponentialSupply):
        alpha = rule.k * (rule.r - 1.0)
        if alpha < 1:
            raise UnsupportedRule(f"k(r-1) = {alpha:.4g} < 1 gives no guarantee")
        return Guarantee(alpha, rule.k * rule.p0 / alpha, 2.0 * alpha)

    raise UnsupportedRule(f"no guarantee known for rule {rule.name}")


def _trajectory_ok(model: CostModel, alpha: float, p0: float, y_max: float) -> tuple[bool, float]:
    """Integrate dp/dy = alpha*(p - f'(y)) / f*'(p) from p(0) = p0.

    Returns whether p stays finite, nondecreasing and above f' on [0, y_max],
    and the end ratio p(y_max)/f'(y_max).
    """

    def rhs(y: float, p: np.ndarray) -> list[float]:
        q = max(float(p[0]), 0.0)
        return [alpha * (q - float(model.f_prime(y))) / max(model.conjugate_prime(q), 1e-300)]

    def touches_marginal(y: float, p: np.ndarray) -> float:
        return float(p[0]) - float(model.f_prime(y))

    touches_marginal.terminal = True  # type: ignore[attr-defined]
    touches_marginal.direction = -1  # type: ignore[attr-defined]

    sol = solve_ivp(
        rhs,
        (0.0, y_max),
        [p0],
        method="RK45",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        events=touches_marginal,
    )
    path = sol.y[0]
    if sol.status != 0 or not np.all(np.isfinite(path)):
        return False, 0.0
    if np.any(np.diff(path) < -ODE_RTOL * np.maximum(1.0, np.abs(path[1:]))):
        return False, 0.0
    if np.any(path < np.asarray(model.f_prime(sol.t), dtype=float)):
        return False, 0.0
    return True, float(path[-1] / model.f_prime(y_max))


def _tail_certified(model: CostModel, alpha: float, y: float, q_end: float) -> bool:
    """Some price/marginal ratio q in [1, q_end] is stationary-or-growing at y.

    G(q) = alpha*(q-1)*y / f*'(q f'(y)) - q*y*f''(y)/f'(y) >= 0 means the ratio
    p/f' cannot fall below q past y when f is locally self-similar.
    """
    if q_end <= 1.0:
        return False
    fp, fpp = float(model.f_prime(y)), float(model.f_second(y))
    elasticity = y * fpp / fp

    def g(q: float) -> float:
        return alpha * (q - 1.0) * y / model.conjugate_prime(q * fp) - q * elasticity

    qs = np.geomspace(1.0 + 1e-9, q_end, CERTIFICATE_POINTS)
    values = np.array([g(q) for q in qs])
    i = int(np.argmax(values))
    if values[i] >= 0:
        return True
    lo, hi = qs[max(i - 1, 0)], qs[min(i + 1, qs.size - 1)]
    if hi <= lo:
        return False
    res = minimize_scalar(lambda q: -g(q), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return bool(-res.fun >= 0)


def estimate_alpha(
    model: CostModel,
    y_max: float = 100.0,
    p0: Optional[float] = None,
    tol: float = 1e-4,
) -> float:
    """Bisect for the smallest alpha whose equality pricing ODE stays feasible.

    A candidate passes when the RK45 trajectory from p0 stays finite, monotone
    and above f' on [0, y_max], and the tail certificate holds at y_max. This is
    a heuristic estimate of alpha(f); for power costs it reproduces the closed form.
    """
    if not model.strictly_convex or isinstance(model, StepSupplyCost):
        raise DomainError(f"estimate_alpha needs a strictly convex cost, got {model.kind}")
    if not y_max > 0:
        raise DomainError(f"y_max must be positive, got {y_max}")
    base = float(model.f_prime(0.0))
    if p0 is None:
        p0 = base + 1e-3 * float(model.f_prime(1.0))
    if not p0 > base:
        raise DomainError(f"p0 must exceed f'(0) = {base}, got {p0}")

    def feasible(alpha: float) -> bool:
        ok, q_end = _trajectory_ok(model, alpha, p0, y_max)
        return ok and _tail_certified(model, alpha, y_max, q_end)

    lo, hi = BISECTION_BRACKET
    if not feasible(hi):
        raise NumericalError(f"no feasible alpha up to {hi:g} for {model.kind}")
    for step in range(BISECTION_ITERATIONS):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
        logger.debug("estimate_alpha step %d: [%.6g, %.6g]", step, lo, hi)
    return 0.5 * (lo + hi)

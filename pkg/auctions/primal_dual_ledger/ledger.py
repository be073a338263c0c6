"""Primal and dual objective series along a trace, and the local/global inequality checks."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from auctions.auction_engine.mechanism import AuctionTrace, Instance, posted_prices, select_bundle
from auctions.cost_models.models import StepSupplyCost
from auctions.errors import InconsistentTrace
from auctions.pricing_rules.rules import PricingRule
from auctions.settings import INTEGRAL_TOL, REL_TOL

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualState:
    u: Tuple[float, ...]
    p: Tuple[float, ...]
    objective: float


@dataclass(frozen=True)
class PrimalState:
    x: Tuple[Tuple[int, ...], ...]
    y: Tuple[float, ...]
    objective: float


@dataclass(frozen=True)
class LedgerSeries:
    """P^i and D^i for i = 0..n, plus the per-buyer quantities behind them."""

    primal: Tuple[float, ...]
    dual: Tuple[float, ...]
    utilities: Tuple[float, ...]
    bundles: Tuple[Tuple[int, ...], ...]
    final_y: Tuple[float, ...]
    final_prices: Tuple[float, ...]
    # sum of payments minus sum over items of the integral of p from init_y to final y
    discretization_residual: float
    # sum of values minus (sum of utilities + sum of payments)
    payment_identity_residual: float


@dataclass(frozen=True)
class LocalVerdict:
    passed: bool
    first_violation: Optional[int]
    worst_slack: float


@dataclass(frozen=True)
class AuditReport:
    local_ok: bool
    weak_duality_ok: bool
    dual_feasible: bool
    beta_actual: float
    beta_theorem: Optional[float]
    first_violation: Optional[int]
    opt: Optional[float]
    dual_objective: float
    primal_objective: float


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOL * max(1.0, abs(a), abs(b))


def _revenue_integral(rule: PricingRule, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    value, _ = quad(lambda t: float(rule.price(t)), lo, hi, epsabs=INTEGRAL_TOL, epsrel=INTEGRAL_TOL, limit=200)
    return float(value)


def ledger_from_trace(trace: AuctionTrace, instance: Optional[Instance] = None, rule: Optional[PricingRule] = None) -> LedgerSeries:
    """Rebuild P^i and D^i from the bundles in ``trace``.

    Prices and payments are recomputed from the rule; a disagreement with the
    recorded payment beyond relative 1e-9 raises InconsistentTrace.
    """
    inst = instance or trace.instance
    pricing = rule or trace.rule
    cost, dy = inst.cost, inst.delta_y
    if len(trace.steps) != inst.n:
        raise InconsistentTrace(f"trace has {len(trace.steps)} steps for {inst.n} buyers")

    y = np.full(inst.m, trace.init_y)
    prices = posted_prices(inst, pricing, y)
    item_cost = [float(cost.f(trace.init_y))] * inst.m
    item_conj = [cost.conjugate(p) for p in prices]

    primal = [-sum(item_cost)]
    dual = [sum(item_conj)]
    utilities: List[float] = []
    total_value = total_utility = total_payment = 0.0

    for i, (buyer, step) in enumerate(zip(inst.buyers, trace.steps), start=1):
        if buyer.id != step.buyer_id:
            raise InconsistentTrace(f"step {i}: buyer {step.buyer_id} recorded, {buyer.id} expected")
        value = buyer.value_of(step.bundle)
        payment = dy * sum(prices[j - 1] for j in step.bundle)
        if not _close(payment, step.payment):
            raise InconsistentTrace(f"step {i}: recomputed payment {payment!r} != recorded {step.payment!r}")
        utility = value - payment
        for j in step.bundle:
            y[j - 1] += dy
            prices[j - 1] = posted_prices(inst, pricing, [y[j - 1]])[0]
            item_cost[j - 1] = float(cost.f(float(y[j - 1])))
            item_conj[j - 1] = cost.conjugate(prices[j - 1])

        total_value += value
        total_utility += utility
        total_payment += payment
        utilities.append(utility)
        primal.append(total_value - sum(item_cost))
        dual.append(total_utility + sum(item_conj))

    if isinstance(cost, StepSupplyCost):
        integral = sum(_revenue_integral(pricing, trace.init_y, min(float(yj), cost.k)) for yj in y)
    else:
        integral = sum(_revenue_integral(pricing, trace.init_y, float(yj)) for yj in y)

    return LedgerSeries(
        primal=tuple(primal),
        dual=tuple(dual),
        utilities=tuple(utilities),
        bundles=tuple(step.bundle for step in trace.steps),
        final_y=tuple(float(v) for v in y),
        final_prices=tuple(prices),
        discretization_residual=total_payment - integral,
        payment_identity_residual=total_value - (total_utility + total_payment),
    )


def check_local(series: LedgerSeries, alpha: float) -> LocalVerdict:
    """P^i - P^{i-1} >= (D^i - D^{i-1})/alpha for every buyer i."""
    worst = 0.0
    first: Optional[int] = None
    for i in range(1, len(series.primal)):
        dp = series.primal[i] - series.primal[i - 1]
        dd = (series.dual[i] - series.dual[i - 1]) / alpha
        slack = (dp - dd) / max(1.0, abs(dd), abs(dp))
        worst = min(worst, slack)
        if slack < -REL_TOL and first is None:
            first = i
    if first is not None:
        logger.info("local check fails first at buyer %d (alpha=%g)", first, alpha)
    return LocalVerdict(passed=first is None, first_violation=first, worst_slack=worst)


def final_dual_state(series: LedgerSeries) -> DualState:
    return DualState(u=series.utilities, p=series.final_prices, objective=series.dual[-1])


def final_primal_state(series: LedgerSeries) -> PrimalState:
    return PrimalState(x=series.bundles, y=series.final_y, objective=series.primal[-1])


def check_dual_feasibility(trace: AuctionTrace, series: LedgerSeries) -> bool:
    """u_i + dy * sum_{j in S} p_j >= v_iS for every listed bundle, at the prices buyer i faced."""
    inst = trace.instance
    for buyer, step, u in zip(inst.buyers, trace.steps, series.utilities):
        _, best = select_bundle(buyer, step.prices_faced, inst.delta_y)
        if not _close(u, best) or u < -REL_TOL:
            return False
        for bundle in buyer.bundles:
            charged = inst.delta_y * sum(step.prices_faced[j - 1] for j in bundle.items)
            if u + charged < bundle.value - REL_TOL * max(1.0, bundle.value):
                return False
    return True


def check_weak_duality(instance: Instance, dual: DualState, opt_value: float) -> bool:
    """D >= OPT, up to 1e-9 relative."""
    return dual.objective >= opt_value - REL_TOL * max(1.0, abs(dual.objective))


def beta_actual(series: LedgerSeries, alpha: float) -> float:
    """D^0/alpha - P^0, the additive constant realised by the initialisation."""
    return series.dual[0] / alpha - series.primal[0]


def audit(
    trace: AuctionTrace,
    alpha: float,
    opt_value: Optional[float] = None,
    beta_theorem: Optional[float] = None,
) -> AuditReport:
    series = ledger_from_trace(trace)
    local = check_local(series, alpha)
    dual = final_dual_state(series)
    weak = True if opt_value is None else check_weak_duality(trace.instance, dual, opt_value)
    return AuditReport(
        local_ok=local.passed,
        weak_duality_ok=weak,
        dual_feasible=check_dual_feasibility(trace, series),
        beta_actual=beta_actual(series, alpha),
        beta_theorem=beta_theorem,
        first_violation=local.first_violation,
        opt=opt_value,
        dual_objective=dual.objective,
        primal_objective=series.primal[-1],
    )

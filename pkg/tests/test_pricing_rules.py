from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auctions.cost_models.models import LinearMarginalCost, LogMarginalCost, PolyMarginalCost, PowerCost, StepSupplyCost
from auctions.errors import DomainError, UnsupportedRule
from auctions.pricing_rules.alpha import (
    estimate_alpha,
    guaranteed_alpha,
    poly_marginal_alpha,
    power_alpha,
)
from auctions.pricing_rules.feasibility import check_eq1, check_eq2_range, check_eq2_step
from auctions.pricing_rules.rules import (
    ConcaveIntegral,
    ExponentialSupply,
    UnifiedFractional,
    concave_integral_rule,
    exponential_supply_rule,
    power_rule,
    price,
    rule_from_spec,
    rule_to_spec,
    unified_fractional_rule,
    unified_integral_rule,
)


def test_power_rule_prices(power_cost, cubic_cost):
    assert price(power_rule(power_cost), 3.0) == pytest.approx(6.0)
    assert price(power_rule(power_cost, integral=True), 2.0) == pytest.approx(6.0)
    rule = power_rule(cubic_cost)
    assert rule.lam == pytest.approx(math.sqrt(3.0))
    # p(y) = (gamma+1) * y^gamma for f(y) = y^(gamma+1)/(gamma+1)
    assert price(rule, 2.0) == pytest.approx(12.0)


def test_power_rule_needs_power_cost(linear_cost):
    with pytest.raises(UnsupportedRule):
        power_rule(linear_cost)


def test_unified_rules(power_cost):
    assert price(unified_fractional_rule(power_cost, 3.0), 1.0) == pytest.approx(3.0)
    assert price(unified_integral_rule(power_cost), 0.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        UnifiedFractional(cost=power_cost, lam=1.0)


def test_exponential_supply_constants():
    rule = exponential_supply_rule(StepSupplyCost(k=8), m=4, v_min=1.0, v_max=16.0)
    assert rule.p0 == pytest.approx(0.125)
    assert rule.r == pytest.approx(2.0 ** (7.0 / 8.0))
    assert price(rule, 8.0) == pytest.approx(16.0, rel=1e-9)
    assert guaranteed_alpha(rule).alpha == pytest.approx(8.0 * (2.0 ** (7.0 / 8.0) - 1.0))
    assert guaranteed_alpha(rule).alpha == pytest.approx(6.672, abs=1e-3)
    assert guaranteed_alpha(rule).ratio == pytest.approx(2.0 * guaranteed_alpha(rule).alpha)


def test_exponential_supply_needs_step_cost(power_cost):
    with pytest.raises(UnsupportedRule):
        exponential_supply_rule(power_cost, m=1, v_min=1.0, v_max=2.0)
    with pytest.raises(UnsupportedRule):
        ExponentialSupply(cost=power_cost)


def test_rule_spec_round_trip(power_cost):
    rule = rule_from_spec({"name": "unified-integral", "params": {"lam": 3.0}}, power_cost)
    assert rule_to_spec(rule) == {"name": "unified-integral", "params": {"lam": 3.0}}
    assert rule_from_spec(rule_to_spec(rule), power_cost) == rule


def test_rule_spec_exponential_needs_bounds():
    cost = StepSupplyCost(k=4)
    with pytest.raises(DomainError):
        rule_from_spec({"name": "exponential-supply"}, cost)
    rule = rule_from_spec({"name": "exponential-supply"}, cost, m=2, v_min=1.0, v_max=4.0)
    assert rule.p0 == pytest.approx(0.25)


@pytest.mark.parametrize(
    "rule_factory",
    [
        lambda: power_rule(PowerCost(a=0.5, gamma=1)),
        lambda: power_rule(PowerCost(a=1.0 / 3.0, gamma=2), integral=True),
        lambda: unified_fractional_rule(LogMarginalCost()),
        lambda: unified_integral_rule(PowerCost(a=1.0 / 3.0, gamma=2)),
        lambda: unified_integral_rule(LogMarginalCost()),
        lambda: concave_integral_rule(LinearMarginalCost(a=1.0, b=0.0)),
        lambda: exponential_supply_rule(StepSupplyCost(k=8), 4, 1.0, 16.0),
    ],
)
@settings(max_examples=40, deadline=None)
@given(y=st.floats(min_value=0.0, max_value=50.0), dy=st.floats(min_value=0.0, max_value=5.0))
def test_rules_are_nondecreasing(rule_factory, y, dy):
    rule = rule_factory()
    before = float(rule.price(y))
    assert float(rule.price(y + dy)) >= before - 1e-12 * max(1.0, before)


def test_unified_integral_step_inequality(power_cost):
    # p(y) = 2(y+1): lhs = y + 3/2, rhs = (4y + 6)/alpha
    rule = unified_integral_rule(power_cost)
    assert check_eq2_step(rule, 4.4, 9)
    assert not check_eq2_step(rule, 1.0, 9)
    assert check_eq2_range(rule, 4.4, 9, 200) == []
    assert check_eq2_range(rule, 1.0, 0, 3) == [0, 1, 2, 3]


def test_step_inequality_rejects_supply_boundary():
    rule = exponential_supply_rule(StepSupplyCost(k=3), 1, 1.0, 4.0)
    with pytest.raises(DomainError):
        check_eq2_step(rule, 3.0, 3)
    assert check_eq2_range(rule, guaranteed_alpha(rule).alpha, 0, 100) == []


def test_fractional_inequality_is_tight_for_power_rule(power_cost):
    rule = power_rule(power_cost)
    grid = np.linspace(0.0, 10.0, 101)
    verdict = check_eq1(rule, 4.0, 0.0, grid)
    assert verdict.feasible
    assert verdict.y_checked_max == 10.0
    assert verdict.tail_verified is False
    assert not check_eq1(rule, 3.5, 0.0, grid).feasible


@pytest.mark.parametrize(
    "cost, alpha",
    [
        (PowerCost(a=1.0 / 3.0, gamma=2), 16.0 / 3.0),
        (LogMarginalCost(), 4.0),
        (LinearMarginalCost(a=1.0, b=0.0), 4.0),
        (PolyMarginalCost(a=1.0, d=2), 16.0 / 3.0),
    ],
    ids=lambda v: getattr(v, "kind", ""),
)
def test_unified_fractional_meets_its_guarantee(cost, alpha):
    rule = unified_fractional_rule(cost)
    guarantee = guaranteed_alpha(rule)
    assert guarantee.alpha == pytest.approx(alpha, rel=1e-3)
    verdict = check_eq1(rule, guarantee.alpha, guarantee.beta, np.linspace(0.0, 50.0, 5001))
    assert verdict.feasible, verdict


def test_fractional_inequality_prefixes_zero(power_cost):
    verdict = check_eq1(power_rule(power_cost), 4.0, 0.0, [1.0, 2.0, 3.0])
    assert verdict.feasible
    with pytest.raises(DomainError):
        check_eq1(power_rule(power_cost), 0.5, 0.0, [1.0])
    with pytest.raises(DomainError):
        check_eq1(power_rule(power_cost), 4.0, 0.0, [2.0, 1.0])


def test_closed_form_alphas():
    assert power_alpha(1) == pytest.approx(4.0)
    assert power_alpha(2) == pytest.approx(3.0**1.5)
    assert poly_marginal_alpha(1, 0.0) == pytest.approx(4.0)
    assert poly_marginal_alpha(2, 0.1) == pytest.approx(1.1 * 1.5**3 * 2)


def test_guarantees_per_rule(power_cost, cubic_cost, linear_cost):
    assert tuple(guaranteed_alpha(power_rule(power_cost))) == pytest.approx((4.0, 0.0, 4.0))

    integral = guaranteed_alpha(power_rule(power_cost, integral=True), epsilon=0.1)
    assert integral.alpha == pytest.approx(4.4)
    # f*(f'(2/eps))/alpha + f(1/eps - 1) with f'(20) = 20
    assert integral.beta == pytest.approx(200.0 / 4.4 + 40.5)

    unified = guaranteed_alpha(unified_fractional_rule(cubic_cost))
    assert unified.alpha == pytest.approx(16.0 / 3.0, rel=1e-6)

    assert guaranteed_alpha(concave_integral_rule(linear_cost), 0.1).alpha == pytest.approx(4.4)


def test_unsupported_pairings(cubic_cost):
    with pytest.raises(UnsupportedRule):
        guaranteed_alpha(ConcaveIntegral(cost=cubic_cost))
    with pytest.raises(UnsupportedRule):
        guaranteed_alpha(unified_fractional_rule(StepSupplyCost(k=2)))
    with pytest.raises(UnsupportedRule):
        guaranteed_alpha(ExponentialSupply(cost=StepSupplyCost(k=1), p0=1.0, r=1.5))
    with pytest.raises(DomainError):
        guaranteed_alpha(power_rule(cubic_cost, integral=True), epsilon=0.0)


def test_estimate_alpha_matches_power_closed_form():
    assert estimate_alpha(PowerCost(a=0.5, gamma=1), tol=1e-3) == pytest.approx(4.0, rel=0.02)


def test_estimate_alpha_linear_marginal(linear_cost):
    assert estimate_alpha(linear_cost, tol=1e-3) <= 4.08


def test_estimate_alpha_rejects_non_convex():
    with pytest.raises(DomainError):
        estimate_alpha(StepSupplyCost(k=2))
    with pytest.raises(DomainError):
        estimate_alpha(PowerCost(a=0.5, gamma=1), y_max=0.0)
    with pytest.raises(DomainError):
        estimate_alpha(PowerCost(a=0.5, gamma=1), p0=0.0)

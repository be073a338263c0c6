from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from auctions.adversary_instances.generators import gen_random_multi_minded
from auctions.auction_engine.mechanism import run_mechanism
from auctions.cost_models.models import LinearMarginalCost, PowerCost, StepSupplyCost
from auctions.errors import InconsistentTrace
from auctions.oracles_offline.oracles import brute_force_opt
from auctions.pricing_rules.alpha import guaranteed_alpha
from auctions.pricing_rules.rules import concave_integral_rule, exponential_supply_rule, power_rule
from auctions.primal_dual_ledger.ledger import (
    audit,
    beta_actual,
    check_dual_feasibility,
    check_local,
    check_weak_duality,
    final_dual_state,
    final_primal_state,
    ledger_from_trace,
)


@pytest.fixture
def integral_trace(two_item_instance):
    rule = power_rule(two_item_instance.cost, integral=True)
    # eps = 1 starts from y = 0 with p(y) = 2(y+1)
    return run_mechanism(two_item_instance, rule, init_y=0.0)


def test_series_match_trace(two_item_instance):
    trace = run_mechanism(two_item_instance, power_rule(two_item_instance.cost))
    series = ledger_from_trace(trace)

    assert len(series.primal) == two_item_instance.n + 1
    assert series.primal[0] == 0.0
    assert series.dual[0] == 0.0
    assert series.primal[1:] == pytest.approx([s.primal for s in trace.steps])
    assert series.dual[1:] == pytest.approx([s.dual for s in trace.steps])
    assert series.primal[-1] == pytest.approx(7.5)
    assert series.payment_identity_residual == pytest.approx(0.0, abs=1e-12)
    assert final_primal_state(series).y == (2.0, 2.0)
    assert final_dual_state(series).p == pytest.approx((4.0, 4.0))


def test_discretisation_residual(two_item_instance):
    trace = run_mechanism(two_item_instance, power_rule(two_item_instance.cost))
    series = ledger_from_trace(trace)
    # payments 0 + 2 + 2 + 0 (alice's second unit) against int_0^2 2t dt = 4 per item
    assert series.discretization_residual == pytest.approx(4.0 - 8.0)


def test_local_check_with_guaranteed_alpha(integral_trace):
    series = ledger_from_trace(integral_trace)
    alpha = guaranteed_alpha(integral_trace.rule, epsilon=1.0).alpha
    assert check_local(series, alpha).passed
    verdict = check_local(series, 1.0)
    assert not verdict.passed
    assert verdict.first_violation == 1
    assert verdict.worst_slack < 0


def test_weak_duality_and_beta(integral_trace):
    series = ledger_from_trace(integral_trace)
    dual = final_dual_state(series)
    assert check_weak_duality(integral_trace.instance, dual, 7.5)
    assert not check_weak_duality(integral_trace.instance, dual, dual.objective + 1.0)
    assert beta_actual(series, 2.0) == pytest.approx(series.dual[0] / 2.0 - series.primal[0])
    # D^0 = sum_j f*(2), D^n = (1 + 2) + sum_j f*(4)
    assert series.primal[0] == 0.0
    assert series.dual[0] == pytest.approx(4.0)
    assert dual.objective == pytest.approx(19.0)


def test_dual_feasibility(integral_trace):
    series = ledger_from_trace(integral_trace)
    assert check_dual_feasibility(integral_trace, series)


def test_tampered_payment_is_detected(two_item_instance):
    trace = run_mechanism(two_item_instance, power_rule(two_item_instance.cost))
    trace.steps[1] = dataclasses.replace(trace.steps[1], payment=trace.steps[1].payment + 0.5)
    with pytest.raises(InconsistentTrace):
        ledger_from_trace(trace)


def test_truncated_trace_is_detected(two_item_instance):
    trace = run_mechanism(two_item_instance, power_rule(two_item_instance.cost))
    trace.steps.pop()
    with pytest.raises(InconsistentTrace):
        ledger_from_trace(trace)


def test_audit_report(integral_trace):
    report = audit(integral_trace, alpha=5.0, opt_value=7.5, beta_theorem=3.0)
    assert report.local_ok
    assert report.weak_duality_ok
    assert report.dual_feasible
    assert report.first_violation is None
    assert report.beta_theorem == 3.0
    assert report.opt == 7.5


def test_local_check_on_random_instances():
    cost = LinearMarginalCost(a=1.0, b=0.0)
    rule = concave_integral_rule(cost)
    alpha = guaranteed_alpha(rule, epsilon=0.1).alpha
    for seed in range(25):
        instance = gen_random_multi_minded(3, 10, 3, cost, 1.0, 40.0, seed)
        trace = run_mechanism(instance, rule, init_y=9.0)
        assert check_local(ledger_from_trace(trace), alpha).passed, seed


@pytest.mark.parametrize("k, m", [(8, 4), (1, 3)])
def test_supply_ledger_against_brute_force(k, m):
    v_min, v_max = 1.0, 16.0
    cost = StepSupplyCost(k=k)
    rule = exponential_supply_rule(cost, m, v_min, v_max)
    for seed in range(20):
        instance = gen_random_multi_minded(m, 8, 2, cost, v_min, v_max, seed)
        trace = run_mechanism(instance, rule)
        series = ledger_from_trace(trace)
        # D^0 = sum_j k * p(0) = m * k * v_min / 2m
        assert series.dual[0] == pytest.approx(k * v_min / 2.0)
        assert series.primal[0] == 0.0
        opt = brute_force_opt(instance).value
        assert check_weak_duality(instance, final_dual_state(series), opt), seed
        assert check_dual_feasibility(trace, series), seed


def test_integral_ledger_against_brute_force():
    cost = PowerCost(a=0.5, gamma=1)
    rule = power_rule(cost, integral=True)
    top = float(rule.price(13.0))
    for seed in range(20):
        instance = gen_random_multi_minded(3, 8, 2, cost, 1.0, top, seed)
        trace = run_mechanism(instance, rule, init_y=9.0)
        series = ledger_from_trace(trace)
        opt = brute_force_opt(instance).value
        assert check_weak_duality(instance, final_dual_state(series), opt), seed
        assert check_dual_feasibility(trace, series), seed


def test_increments_telescope():
    cost = LinearMarginalCost(a=1.0, b=0.0)
    instance = gen_random_multi_minded(4, 200, 3, cost, 1.0, 40.0, seed=5)
    series = ledger_from_trace(run_mechanism(instance, concave_integral_rule(cost), init_y=9.0))
    n = instance.n
    for values in (series.primal, series.dual):
        steps = np.diff(values)
        assert len(steps) == n
        assert steps.sum() == pytest.approx(values[-1] - values[0], abs=1e-9 * n)

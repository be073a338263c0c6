from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from auctions.cost_models.constructions import (
    cost_from_spec,
    cost_to_spec,
    faulhaber_cost,
    linear_marginal_cost,
    log_marginal_cost,
)
from auctions.cost_models.gamma import gamma_quantities
from auctions.cost_models.models import (
    CostModel,
    LinearMarginalCost,
    LogMarginalCost,
    PolyMarginalCost,
    PowerCost,
    StepSupplyCost,
    eval_conjugate,
    eval_conjugate_prime,
    eval_f,
    eval_f_prime,
    eval_f_second,
    marginal_cost,
)
from auctions.cost_models.power_sums import bernoulli_numbers, faulhaber_coefficients
from auctions.errors import DomainError

CONVEX_MODELS = [
    PowerCost(a=0.5, gamma=1),
    PowerCost(a=1.0 / 3.0, gamma=2),
    PowerCost(a=0.25, gamma=3),
    LinearMarginalCost(a=1.0, b=0.5),
    PolyMarginalCost(a=1.0, d=2),
    PolyMarginalCost(a=0.5, d=3),
    LogMarginalCost(),
]

prices = st.floats(min_value=0.0, max_value=50.0, allow_nan=False)
quantities = st.floats(min_value=0.0, max_value=30.0, allow_nan=False)


def test_bernoulli_numbers_use_plus_half_convention():
    assert bernoulli_numbers(4) == [Fraction(1), Fraction(1, 2), Fraction(1, 6), Fraction(0), Fraction(-1, 30)]


def test_faulhaber_small_values():
    assert faulhaber_cost(1.0, 2).f(3.0) == pytest.approx(14.0)
    assert faulhaber_cost(2.0, 3).f(4.0) == pytest.approx(200.0)


@pytest.mark.parametrize("d", range(2, 7))
def test_faulhaber_matches_direct_sums(d):
    model = faulhaber_cost(1.0, d)
    running = 0
    for y in range(1, 101):
        running += y**d
        assert float(model.f(float(y))) == pytest.approx(running, rel=1e-8)


def test_faulhaber_coefficients_are_exact():
    # S_3(n) = n^2 (n+1)^2 / 4
    assert faulhaber_coefficients(3) == (Fraction(0), Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def test_faulhaber_degree_limit():
    with pytest.raises(OverflowError):
        faulhaber_cost(1.0, 17)


def test_poly_marginal_degree_must_be_integer():
    with pytest.raises(DomainError):
        PolyMarginalCost(a=1.0, d=2.5)
    with pytest.raises(ValidationError):
        cost_from_spec({"kind": "poly_marginal", "a": 1.0, "d": 1})


def test_poly_marginal_high_degree_is_convex_only_past_threshold():
    model = faulhaber_cost(1.0, 4)
    assert float(model.f_prime(0.0)) < 0
    assert model.convex_from > 0
    ys = np.linspace(model.convex_from, 20.0, 500)
    assert np.all(np.diff(model.f_prime(ys)) > 0)
    assert np.all(model.f_second(ys[1:]) > 0)


def test_linear_marginal_sums_at_integers():
    model = linear_marginal_cost(2.0, 1.0)
    for y in range(1, 30):
        assert float(model.f(float(y))) == pytest.approx(sum(2.0 * l + 1.0 for l in range(1, y + 1)))
        assert marginal_cost(model, y) == pytest.approx(2.0 * y + 1.0)


def test_linear_marginal_flat_marginal_is_unbounded_above_b():
    model = LinearMarginalCost(a=0.0, b=1.0)
    assert not model.strictly_convex
    assert model.conjugate(0.5) == 0.0
    with pytest.raises(DomainError):
        model.conjugate(2.0)


def test_log_marginal_segment_integrals():
    model = log_marginal_cost()
    for l in range(1, 66):
        assert marginal_cost(model, l) == pytest.approx(math.log1p(l), rel=1e-9)


def test_log_marginal_is_concave_and_increasing():
    model = log_marginal_cost()
    assert np.all(model.deltas > 0)
    assert np.all(np.diff(model.deltas[:65]) <= 1e-15)
    ys = np.linspace(0.0, 80.0, 4001)
    fp = model.f_prime(ys)
    assert float(fp[0]) > 0
    assert np.all(np.diff(fp) > 0)


def test_log_marginal_extends_past_last_segment():
    model = LogMarginalCost(segments=8)
    slope = 2.0 * model.deltas[-1]
    assert float(model.f_prime(12.0)) - float(model.f_prime(10.0)) == pytest.approx(2.0 * slope)


@pytest.mark.parametrize(
    "model",
    [LogMarginalCost(), LogMarginalCost(segments=8), PolyMarginalCost(a=1.0, d=2), faulhaber_cost(1.0, 4)],
    ids=lambda m: cost_to_spec(m)["kind"],
)
def test_marginal_inverse_matches_bracketed_root(model):
    lo = model.convex_from
    start = float(model.f_prime(lo)) + 0.5
    for p in np.linspace(start, float(model.f_prime(lo + 40.0)), 37):
        expected = CostModel._invert_marginal(model, float(p), lo)
        assert model._invert_marginal(float(p), lo) == pytest.approx(expected, rel=1e-9, abs=1e-9)
        assert model.maximizer(float(p)) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_power_conjugate_closed_form(power_cost):
    assert power_cost.conjugate(16.0) == pytest.approx(128.0)
    assert power_cost.conjugate_prime(16.0) == pytest.approx(16.0)
    assert eval_conjugate(power_cost, 0.0) == 0.0


def test_step_supply_cost():
    model = StepSupplyCost(k=3)
    assert float(model.f(3.0)) == 0.0
    assert model.conjugate(2.0) == pytest.approx(6.0)
    assert model.conjugate_prime(2.0) == 3.0
    assert not model.strictly_convex
    with pytest.raises(DomainError):
        model.f(3.5)
    with pytest.raises(DomainError):
        model.f_prime(3.0)
    with pytest.raises(DomainError):
        eval_f_second(model, 1.0)


def test_negative_quantity_is_rejected(power_cost):
    with pytest.raises(DomainError):
        eval_f(power_cost, -1.0)
    with pytest.raises(DomainError):
        power_cost.conjugate(-0.5)


def test_vectorised_evaluation_keeps_shape(cubic_cost):
    ys = np.array([0.0, 1.0, 2.0])
    np.testing.assert_allclose(eval_f_prime(cubic_cost, ys), [0.0, 1.0, 4.0])
    np.testing.assert_allclose(eval_f_second(cubic_cost, ys), [0.0, 2.0, 4.0])
    assert isinstance(eval_f(cubic_cost, 2.0), float)


@pytest.mark.parametrize("model", CONVEX_MODELS, ids=lambda m: cost_to_spec(m)["kind"])
def test_spec_round_trip(model):
    assert cost_from_spec(cost_to_spec(model)) == model


@pytest.mark.parametrize("model", CONVEX_MODELS, ids=lambda m: cost_to_spec(m)["kind"])
@settings(max_examples=60, deadline=None)
@given(p=prices, y=quantities)
def test_fenchel_young(model, p, y):
    assert p * y <= float(model.f(y)) + model.conjugate(p) + 1e-9 * max(1.0, p * y)


@pytest.mark.parametrize("model", CONVEX_MODELS, ids=lambda m: cost_to_spec(m)["kind"])
@settings(max_examples=60, deadline=None)
@given(y=st.floats(min_value=0.01, max_value=30.0))
def test_conjugate_derivative_inverts_marginal(model, y):
    p = float(model.f_prime(y))
    assert eval_conjugate_prime(model, p) == pytest.approx(y, rel=1e-7, abs=1e-9)
    assert model.conjugate(p) == pytest.approx(p * y - float(model.f(y)), rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("model", CONVEX_MODELS, ids=lambda m: cost_to_spec(m)["kind"])
def test_conjugate_vanishes_below_marginal_at_zero(model):
    base = float(model.f_prime(0.0))
    assert model.conjugate(base) == pytest.approx(0.0, abs=1e-12)
    assert model.conjugate(0.0) == 0.0


def test_gamma_times_for_power_costs(power_cost, cubic_cost):
    assert gamma_quantities(power_cost, lam=2.0, tau=1.0).gamma_times == pytest.approx(1.0)
    report = gamma_quantities(cubic_cost, lam=2.0, tau=1.0)
    assert report.gamma_times == pytest.approx(4.0 / 3.0, rel=1e-6)
    assert report.gamma_plus == pytest.approx(3.0, rel=1e-6)


@pytest.mark.parametrize("model", [LinearMarginalCost(a=1.0, b=0.0), LogMarginalCost()])
def test_gamma_times_is_one_for_concave_marginals(model):
    assert gamma_quantities(model, lam=2.0, tau=1.0, y_max=60.0).gamma_times == pytest.approx(1.0)


def test_gamma_rejects_bad_arguments(power_cost):
    with pytest.raises(DomainError):
        gamma_quantities(power_cost, lam=1.0, tau=1.0)
    with pytest.raises(DomainError):
        gamma_quantities(power_cost, lam=2.0, tau=0.0)
    with pytest.raises(DomainError):
        gamma_quantities(StepSupplyCost(k=2), lam=2.0, tau=1.0)

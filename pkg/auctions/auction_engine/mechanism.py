"""The posted-pricing mechanism: buyers arrive online and buy their best bundle at posted prices."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from auctions.auction_engine.schema import InstanceSpec, TraceSpec
from auctions.cost_models.constructions import cost_from_spec
from auctions.cost_models.models import CostModel, StepSupplyCost
from auctions.errors import DomainError, SupplyViolation
from auctions.pricing_rules.rules import PricingRule, rule_from_spec
from auctions.settings import REL_TOL

logger = logging.getLogger(__name__)

Items = Tuple[int, ...]


@dataclass(frozen=True)
class Bundle:
    items: Items
    value: float


@dataclass(frozen=True)
class Buyer:
    """A multi-minded buyer: listed bundles have the given value, all others 0."""

    id: str
    bundles: Tuple[Bundle, ...] = ()

    def value_of(self, items: Items) -> float:
        for bundle in self.bundles:
            if bundle.items == items:
                return bundle.value
        return 0.0


@dataclass(frozen=True)
class Instance:
    m: int
    delta_y: float
    cost: CostModel
    buyers: Tuple[Buyer, ...] = ()
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    family: Optional[str] = None
    params: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.buyers)


@dataclass(frozen=True)
class TraceStep:
    buyer_id: str
    bundle: Items
    value: float
    payment: float
    utility: float
    prices_faced: Tuple[float, ...]
    y_after: Tuple[float, ...]
    prices_after: Tuple[float, ...]
    primal: float
    dual: float


@dataclass
class AuctionTrace:
    instance: Instance
    rule: PricingRule
    init_y: float
    initial_prices: Tuple[float, ...]
    initial_primal: float
    initial_dual: float
    steps: List[TraceStep] = field(default_factory=list)

    @property
    def final_y(self) -> Tuple[float, ...]:
        return self.steps[-1].y_after if self.steps else (self.init_y,) * self.instance.m

    @property
    def final_prices(self) -> Tuple[float, ...]:
        return self.steps[-1].prices_after if self.steps else self.initial_prices


def _unit_price(instance: Instance, rule: PricingRule, y: float) -> float:
    cost = instance.cost
    if isinstance(cost, StepSupplyCost) and y + instance.delta_y > cost.k + REL_TOL:
        # the next bundle unit would exceed supply: its total price is v_max
        return float(instance.v_max) / instance.delta_y  # type: ignore[arg-type]
    return float(rule.price(y))


def posted_prices(instance: Instance, rule: PricingRule, y: Sequence[float]) -> List[float]:
    """Per-unit price of each item at demands ``y``."""
    return [_unit_price(instance, rule, float(yj)) for yj in y]


def select_bundle(buyer: Buyer, prices: Sequence[float], delta_y: float) -> Tuple[Items, float]:
    """Utility-maximizing bundle at posted prices; the empty bundle is always available.

    Ties go to the empty bundle, then to fewer items, then to lexicographic item order.
    """
    best_key: Tuple[float, int, Items] = (-0.0, 0, ())
    best: Tuple[Items, float] = ((), 0.0)
    for bundle in buyer.bundles:
        utility = bundle.value - delta_y * sum(prices[j - 1] for j in bundle.items)
        key = (-utility, len(bundle.items), bundle.items)
        if key < best_key:
            best_key, best = key, (bundle.items, utility)
    return best


def run_mechanism(instance: Instance, rule: PricingRule, init_y: float = 0.0) -> AuctionTrace:
    """Serve the buyers in arrival order and record every step.

    Demands start at ``init_y`` on every item; each sold bundle adds delta_y to
    its items and the posted prices are updated from the rule.
    """
    if init_y < 0:
        raise DomainError(f"init_y must be >= 0, got {init_y}")
    cost, m, dy = instance.cost, instance.m, instance.delta_y
    if isinstance(cost, StepSupplyCost) and instance.v_max is None:
        raise DomainError("supply-k instances need v_max for boundary pricing")

    y = np.full(m, float(init_y))
    prices = posted_prices(instance, rule, y)
    item_cost = [float(cost.f(float(init_y)))] * m
    item_conj = [cost.conjugate(p) for p in prices]

    total_value = 0.0
    total_utility = 0.0
    trace = AuctionTrace(
        instance=instance,
        rule=rule,
        init_y=float(init_y),
        initial_prices=tuple(prices),
        initial_primal=-sum(item_cost),
        initial_dual=sum(item_conj),
    )

    for buyer in instance.buyers:
        faced = tuple(prices)
        items, utility = select_bundle(buyer, faced, dy)
        value = buyer.value_of(items)
        payment = dy * sum(faced[j - 1] for j in items)

        for j in items:
            y[j - 1] += dy
            if isinstance(cost, StepSupplyCost) and y[j - 1] > cost.k + REL_TOL:
                raise SupplyViolation(f"item {j} reached y={y[j - 1]} above supply k={cost.k}")
            prices[j - 1] = _unit_price(instance, rule, float(y[j - 1]))
            item_cost[j - 1] = float(cost.f(float(y[j - 1])))
            item_conj[j - 1] = cost.conjugate(prices[j - 1])

        total_value += value
        total_utility += utility
        trace.steps.append(
            TraceStep(
                buyer_id=buyer.id,
                bundle=items,
                value=value,
                payment=payment,
                utility=utility,
                prices_faced=faced,
                y_after=tuple(float(v) for v in y),
                prices_after=tuple(prices),
                primal=total_value - sum(item_cost),
                dual=total_utility + sum(item_conj),
            )
        )

    logger.info(
        "ran %s on %d buyers: %d bundles sold",
        rule.name,
        instance.n,
        sum(1 for s in trace.steps if s.bundle),
    )
    return trace


def welfare(trace: AuctionTrace, instance: Optional[Instance] = None) -> float:
    """Sum of values served minus the production cost added on top of init_y."""
    inst = instance or trace.instance
    served = sum(step.value for step in trace.steps)
    base = float(inst.cost.f(trace.init_y))
    return served - sum(float(inst.cost.f(yj)) - base for yj in trace.final_y)


def replay_welfare(trace: AuctionTrace, instance: Instance) -> float:
    """Welfare recomputed from the chosen bundles only, without the recorded y and values."""
    counts = np.zeros(instance.m)
    served = 0.0
    for buyer, step in zip(instance.buyers, trace.steps):
        served += buyer.value_of(step.bundle)
        for j in step.bundle:
            counts[j - 1] += 1
    final = trace.init_y + instance.delta_y * counts
    base = float(instance.cost.f(trace.init_y))
    return served - float(np.sum(instance.cost.f(final) - base))


def instance_from_spec(spec: Mapping[str, Any] | BaseModel) -> Instance:
    parsed = spec if isinstance(spec, InstanceSpec) else InstanceSpec.model_validate(spec)
    buyers = tuple(
        Buyer(id=b.id, bundles=tuple(Bundle(items=tuple(bb.items), value=bb.value) for bb in b.bundles))
        for b in parsed.buyers
    )
    return Instance(
        m=parsed.m,
        delta_y=parsed.delta_y,
        cost=cost_from_spec(parsed.cost),
        buyers=buyers,
        v_min=parsed.v_min,
        v_max=parsed.v_max,
        family=parsed.family,
        params=dict(parsed.params),
    )


def instance_to_spec(instance: Instance) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "m": instance.m,
        "delta_y": instance.delta_y,
        "cost": instance.cost.to_spec(),
        "v_min": instance.v_min,
        "v_max": instance.v_max,
        "buyers": [
            {"id": b.id, "bundles": [{"items": list(bb.items), "value": bb.value} for bb in b.bundles]}
            for b in instance.buyers
        ],
    }
    if instance.family:
        payload["family"] = instance.family
        payload["params"] = dict(instance.params)
    return payload


def trace_to_dict(trace: AuctionTrace) -> Dict[str, Any]:
    return {
        "instance": instance_to_spec(trace.instance),
        "rule": trace.rule.to_spec(),
        "init_y": trace.init_y,
        "initial_prices": list(trace.initial_prices),
        "initial_primal": trace.initial_primal,
        "initial_dual": trace.initial_dual,
        "steps": [
            {
                "buyer_id": s.buyer_id,
                "bundle": list(s.bundle),
                "value": s.value,
                "payment": s.payment,
                "utility": s.utility,
                "prices_faced": list(s.prices_faced),
                "y_after": list(s.y_after),
                "prices_after": list(s.prices_after),
                "primal": s.primal,
                "dual": s.dual,
            }
            for s in trace.steps
        ],
    }


def trace_from_dict(payload: Mapping[str, Any]) -> AuctionTrace:
    parsed = TraceSpec.model_validate(payload)
    instance = instance_from_spec(parsed.instance)
    rule = rule_from_spec(parsed.rule, instance.cost, instance.m, instance.v_min, instance.v_max)
    steps = [
        TraceStep(
            buyer_id=s.buyer_id,
            bundle=tuple(s.bundle),
            value=s.value,
            payment=s.payment,
            utility=s.utility,
            prices_faced=tuple(s.prices_faced),
            y_after=tuple(s.y_after),
            prices_after=tuple(s.prices_after),
            primal=s.primal,
            dual=s.dual,
        )
        for s in parsed.steps
    ]
    return AuctionTrace(
        instance=instance,
        rule=rule,
        init_y=parsed.init_y,
        initial_prices=tuple(parsed.initial_prices),
        initial_primal=parsed.initial_primal,
        initial_dual=parsed.initial_dual,
        steps=steps,
    )

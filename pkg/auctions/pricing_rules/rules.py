"""Posted pricing functions y -> p(y) prescribed by the competitive guarantees."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, Mapping, Optional

import numpy as np
from pydantic import BaseModel

from auctions.auction_engine.schema import RuleSpec
from auctions.cost_models.models import CostModel, PowerCost, Quantity, StepSupplyCost, as_quantity, shaped
from auctions.errors import DomainError, UnsupportedRule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PricingRule(ABC):
    """A nondecreasing unit price p(y) for an item of which y units are sold."""

    cost: CostModel
    name: ClassVar[str]
    integral: ClassVar[bool] = False

    @abstractmethod
    def price(self, y: Quantity) -> Quantity: ...

    def params(self) -> Dict[str, float]:
        return {}

    def to_spec(self) -> Dict[str, Any]:
        return {"name": self.name, "params": self.params()}


@dataclass(frozen=True)
class PowerRule(PricingRule):
    """p(y) = f'(lam*y) with lam = (gamma+1)^(1/gamma); integral form shifts y by one unit.

    For f(y) = y^(gamma+1)/(gamma+1) this is p(y) = (gamma+1)*y^gamma.
    """

    use_integral: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.cost, PowerCost):
            raise UnsupportedRule(f"power rule needs a power cost, got {self.cost.kind}")

    @property
    def name(self) -> str:  # type: ignore[override]
        return "power-integral" if self.use_integral else "power"

    @property
    def integral(self) -> bool:  # type: ignore[override]
        return self.use_integral

    @property
    def lam(self) -> float:
        gamma = self.cost.gamma  # type: ignore[attr-defined]
        return (gamma + 1.0) ** (1.0 / gamma)

    def price(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        shifted = arr + 1.0 if self.use_integral else arr
        return shaped(self.cost.f_prime(self.lam * shifted), y)


@dataclass(frozen=True)
class UnifiedFractional(PricingRule):
    """p(y) = f'(lam*y)."""

    lam: float = 2.0
    name: ClassVar[str] = "unified-fractional"

    def __post_init__(self) -> None:
        if not self.lam > 1:
            raise DomainError(f"lambda must exceed 1, got {self.lam}")

    def price(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.cost.f_prime(self.lam * arr), y)

    def params(self) -> Dict[str, float]:
        return {"lam": self.lam}


@dataclass(frozen=True)
class UnifiedIntegral(PricingRule):
    """p(y) = f'(lam*(y+1))."""

    lam: float = 2.0
    name: ClassVar[str] = "unified-integral"
    integral: ClassVar[bool] = True

    def __post_init__(self) -> None:
        if not self.lam > 1:
            raise DomainError(f"lambda must exceed 1, got {self.lam}")

    def price(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.cost.f_prime(self.lam * (arr + 1.0)), y)

    def params(self) -> Dict[str, float]:
        return {"lam": self.lam}


@dataclass(frozen=True)
class ConcaveIntegral(PricingRule):
    """p(y) = f'(2(y+1)), for costs with concave marginal."""

    name: ClassVar[str] = "concave-integral"
    integral: ClassVar[bool] = True

    def price(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.cost.f_prime(2.0 * (arr + 1.0)), y)


@dataclass(frozen=True)
class ExponentialSupply(PricingRule):
    """p(y) = p0 * r^y for k copies per item."""

    p0: float = 1.0
    r: float = 2.0
    name: ClassVar[str] = "exponential-supply"
    integral: ClassVar[bool] = True

    def __post_init__(self) -> None:
        if not isinstance(self.cost, StepSupplyCost):
            raise UnsupportedRule(f"exponential supply pricing needs a step_supply cost, got {self.cost.kind}")
        if not self.p0 > 0:
            raise DomainError(f"p0 must be positive, got {self.p0}")
        if not self.r > 1:
            raise DomainError(f"r must exceed 1, got {self.r}")

    @property
    def k(self) -> int:
        return self.cost.k  # type: ignore[attr-defined]

    def price(self, y: Quantity) -> Quantity:
        arr = as_quantity(y)
        return shaped(self.p0 * np.power(self.r, arr), y)

    def params(self) -> Dict[str, float]:
        return {"p0": self.p0, "r": self.r}


def price(rule: PricingRule, y: Quantity) -> Quantity:
    return rule.price(y)


def power_rule(cost: CostModel, integral: bool = False) -> PowerRule:
    return PowerRule(cost=cost, use_integral=integral)


def unified_fractional_rule(cost: CostModel, lam: float = 2.0) -> UnifiedFractional:
    return UnifiedFractional(cost=cost, lam=lam)


def unified_integral_rule(cost: CostModel, lam: float = 2.0) -> UnifiedIntegral:
    return UnifiedIntegral(cost=cost, lam=lam)


def concave_integral_rule(cost: CostModel) -> ConcaveIntegral:
    return ConcaveIntegral(cost=cost)


def exponential_supply_rule(cost: CostModel, m: int, v_min: float, v_max: float) -> ExponentialSupply:
    """p0 = v_min/(2m) and r = (2m*rho)^(1/k), so that p(k) = v_max."""
    if not isinstance(cost, StepSupplyCost):
        raise UnsupportedRule(f"exponential supply pricing needs a step_supply cost, got {cost.kind}")
    if not 0 < v_min <= v_max:
        raise DomainError(f"need 0 < v_min <= v_max, got v_min={v_min}, v_max={v_max}")
    rho = v_max / v_min
    p0 = v_min / (2.0 * m)
    r = (2.0 * m * rho) ** (1.0 / cost.k)
    logger.debug("exponential supply rule: p0=%g r=%g (m=%d, rho=%g)", p0, r, m, rho)
    return ExponentialSupply(cost=cost, p0=p0, r=r)


def rule_from_spec(
    spec: Mapping[str, Any] | BaseModel,
    cost: CostModel,
    m: Optional[int] = None,
    v_min: Optional[float] = None,
    v_max: Optional[float] = None,
) -> PricingRule:
    """Build a rule from ``{"name": ..., "params": {...}}``.

    exponential-supply takes p0/r directly or derives them from m, v_min, v_max
    (params first, then the instance values passed in).
    """
    parsed = spec if isinstance(spec, RuleSpec) else RuleSpec.model_validate(spec)
    params = dict(parsed.params)

    if parsed.name == "power":
        return power_rule(cost)
    if parsed.name == "power-integral":
        return power_rule(cost, integral=True)
    if parsed.name == "unified-fractional":
        return unified_fractional_rule(cost, params.get("lam", 2.0))
    if parsed.name == "unified-integral":
        return unified_integral_rule(cost, params.get("lam", 2.0))
    if parsed.name == "concave-integral":
        return concave_integral_rule(cost)

    if "p0" in params and "r" in params:
        return ExponentialSupply(cost=cost, p0=params["p0"], r=params["r"])
    m_ = int(params.get("m", m or 0))
    lo = params.get("v_min", v_min)
    hi = params.get("v_max", v_max)
    if not m_ or lo is None or hi is None:
        raise DomainError("exponential-supply needs p0 and r, or m, v_min and v_max")
    return exponential_supply_rule(cost, m_, lo, hi)


def rule_to_spec(rule: PricingRule) -> Dict[str, Any]:
    return rule.to_spec()

"""JSON input formats: cost specifications, instances, rules, traces and sweep configs."""
from __future__ import annotations

from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, TypeAdapter, field_validator, model_validator

from auctions.settings import BUNDLE_LIST_CAP

RULE_NAMES = (
    "power",
    "power-integral",
    "unified-fractional",
    "unified-integral",
    "concave-integral",
    "exponential-supply",
)
FAMILY_NAMES = ("staged-single", "value-chain", "bundle-stages", "random")
SAMPLED_FAMILIES = ("bundle-stages", "random")


class PowerSpec(BaseModel):
    kind: Literal["power"] = "power"
    a: float = Field(..., gt=0, description="Scale a in f(y) = a*y^(gamma+1)")
    gamma: float = Field(..., ge=1, description="Exponent gamma >= 1")


class LinearMarginalSpec(BaseModel):
    kind: Literal["linear_marginal"] = "linear_marginal"
    a: float = Field(..., ge=0, description="Slope of the marginal cost c(l) = a*l + b")
    b: float = Field(0.0, ge=0, description="Intercept of the marginal cost")


class PolyMarginalSpec(BaseModel):
    kind: Literal["poly_marginal"] = "poly_marginal"
    a: float = Field(..., gt=0, description="Scale of the marginal cost c(l) = a*l^d")
    d: int = Field(..., ge=2, description="Integer degree d >= 2 (at most 16)")


class LogMarginalSpec(BaseModel):
    kind: Literal["log_marginal"] = "log_marginal"
    segments: int = Field(65, ge=1, description="Unit segments built for c(l) = ln(1+l)")


class StepSupplySpec(BaseModel):
    kind: Literal["step_supply"] = "step_supply"
    k: int = Field(..., ge=1, description="Copies available of each item")


CostSpec = Annotated[
    Union[PowerSpec, LinearMarginalSpec, PolyMarginalSpec, LogMarginalSpec, StepSupplySpec],
    Field(discriminator="kind"),
]
cost_spec_adapter: TypeAdapter[Any] = TypeAdapter(CostSpec)


class BundleSpec(BaseModel):
    items: List[int] = Field(..., min_length=1, description="1-based item indices")
    value: float = Field(..., ge=0, description="Buyer's value for the whole bundle")

    @field_validator("items")
    @classmethod
    def _distinct_items(cls, items: List[int]) -> List[int]:
        if len(set(items)) != len(items):
            raise ValueError(f"bundle lists an item twice: {items}")
        return sorted(items)


class BuyerSpec(BaseModel):
    id: str
    bundles: List[BundleSpec] = Field(default_factory=list, max_length=BUNDLE_LIST_CAP)

    @field_validator("bundles")
    @classmethod
    def _no_duplicate_bundles(cls, bundles: List[BundleSpec]) -> List[BundleSpec]:
        seen = set()
        for bundle in bundles:
            key = tuple(bundle.items)
            if key in seen:
                raise ValueError(f"duplicate bundle {list(key)}")
            seen.add(key)
        return bundles


class InstanceSpec(BaseModel):
    m: int = Field(..., ge=1, description="Number of items")
    delta_y: float = Field(1.0, gt=0, description="Units of each item in a bundle")
    cost: CostSpec
    v_min: Optional[float] = Field(default=None, gt=0)
    v_max: Optional[float] = Field(default=None, gt=0)
    buyers: List[BuyerSpec] = Field(default_factory=list)
    family: Optional[str] = Field(default=None, description="Generator family, when generated")
    params: Dict[str, Any] = Field(default_factory=dict, description="Generator parameters")

    @model_validator(mode="after")
    def _check_consistency(self) -> "InstanceSpec":
        if self.v_min is not None and self.v_max is not None and self.v_min > self.v_max:
            raise ValueError("v_min must not exceed v_max")
        if isinstance(self.cost, StepSupplySpec) and self.v_max is None:
            raise ValueError("step_supply instances need v_max")
        for buyer in self.buyers:
            for bundle in buyer.bundles:
                if bundle.items[0] < 1 or bundle.items[-1] > self.m:
                    raise ValueError(f"buyer {buyer.id}: items {bundle.items} outside 1..{self.m}")
                if self.v_max is not None and bundle.value > self.v_max * (1 + 1e-12):
                    raise ValueError(f"buyer {buyer.id}: value {bundle.value} above v_max")
                if self.v_min is not None and 0 < bundle.value < self.v_min * (1 - 1e-12):
                    raise ValueError(f"buyer {buyer.id}: positive value {bundle.value} below v_min")
        return self


class RuleSpec(BaseModel):
    name: Literal[RULE_NAMES]  # type: ignore[valid-type]
    params: Dict[str, float] = Field(default_factory=dict, description="lam, p0, r, m, v_min, v_max")


class TraceStepSpec(BaseModel):
    buyer_id: str
    bundle: List[int]
    value: float
    payment: float
    utility: float
    prices_faced: List[float]
    y_after: List[float]
    prices_after: List[float]
    primal: float
    dual: float


class TraceSpec(BaseModel):
    instance: InstanceSpec
    rule: RuleSpec
    init_y: float = Field(0.0, ge=0)
    initial_prices: List[float]
    initial_primal: float
    initial_dual: float
    steps: List[TraceStepSpec] = Field(default_factory=list)


class SweepConfig(BaseModel):
    """One experiment: a generator family swept over a parameter grid under one rule."""

    family: Literal[FAMILY_NAMES]  # type: ignore[valid-type]
    rule: RuleSpec
    cost: Optional[CostSpec] = Field(default=None, description="Cost for staged-single and random families")
    epsilon: float = Field(0.1, gt=0, description="Epsilon of the integral guarantees")
    base: Dict[str, Any] = Field(default_factory=dict, description="Generator parameters shared by all points")
    sweep: Dict[str, List[Any]] = Field(default_factory=dict, description="Swept parameter -> values")
    seed: Optional[int] = Field(default=None, description="Mandatory for sampled families")
    opt: Literal["auto", "brute-force", "closed-form"] = "auto"
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_seed(self) -> "SweepConfig":
        if self.family in SAMPLED_FAMILIES and self.seed is None:
            raise ValueError(f"family {self.family} samples bundles and needs a seed")
        if self.family in ("staged-single", "random") and self.cost is None:
            raise ValueError(f"family {self.family} needs a cost specification")
        return self


SCHEMAS = {
    "cost": cost_spec_adapter,
    "instance": TypeAdapter(InstanceSpec),
    "rule": TypeAdapter(RuleSpec),
    "trace": TypeAdapter(TraceSpec),
    "sweep": TypeAdapter(SweepConfig),
}

"""Builders that turn a marginal cost c(l) into a cumulative cost f, and JSON conversion."""
from __future__ import annotations

import logging
from typing import Any, Dict, Mapping

from pydantic import BaseModel

from auctions.auction_engine.schema import (
    LinearMarginalSpec,
    LogMarginalSpec,
    PolyMarginalSpec,
    PowerSpec,
    StepSupplySpec,
    cost_spec_adapter,
)
from auctions.cost_models.models import (
    CostModel,
    LinearMarginalCost,
    LogMarginalCost,
    PolyMarginalCost,
    PowerCost,
    StepSupplyCost,
)

logger = logging.getLogger(__name__)


def faulhaber_cost(a: float, d: int) -> PolyMarginalCost:
    """f(y) = a * sum_{l=1}^y l^d extended to real y by Faulhaber's polynomial."""
    model = PolyMarginalCost(a=a, d=d)
    if model.convex_from > 0:
        logger.info("poly marginal d=%s is convex and increasing only above y=%.6g", d, model.convex_from)
    return model


def log_marginal_cost(segments: int = 65) -> LogMarginalCost:
    return LogMarginalCost(segments=segments)


def linear_marginal_cost(a: float, b: float = 0.0) -> LinearMarginalCost:
    return LinearMarginalCost(a=a, b=b)


def cost_from_spec(spec: Mapping[str, Any] | BaseModel) -> CostModel:
    parsed = spec if isinstance(spec, BaseModel) else cost_spec_adapter.validate_python(dict(spec))

    if isinstance(parsed, PowerSpec):
        return PowerCost(a=parsed.a, gamma=parsed.gamma)
    if isinstance(parsed, LinearMarginalSpec):
        return linear_marginal_cost(parsed.a, parsed.b)
    if isinstance(parsed, PolyMarginalSpec):
        return faulhaber_cost(parsed.a, parsed.d)
    if isinstance(parsed, LogMarginalSpec):
        return log_marginal_cost(parsed.segments)
    if isinstance(parsed, StepSupplySpec):
        return StepSupplyCost(k=parsed.k)
    raise TypeError(f"unknown cost specification {parsed!r}")


def cost_to_spec(model: CostModel) -> Dict[str, Any]:
    return model.to_spec()

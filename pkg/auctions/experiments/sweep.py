"""Experiment sweeps: generate, run, benchmark against OPT and check the guarantee per point."""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from auctions.adversary_instances.generators import (
    gen_limited_supply_bundle_stages,
    gen_limited_supply_value_chain,
    gen_random_multi_minded,
    gen_staged_single_item,
)
from auctions.auction_engine.mechanism import Instance, run_mechanism, welfare
from auctions.auction_engine.schema import SweepConfig
from auctions.cost_models.constructions import cost_from_spec
from auctions.cost_models.models import PolyMarginalCost
from auctions.errors import AuctionError
from auctions.oracles_offline.oracles import opt_for
from auctions.pricing_rules.alpha import guaranteed_alpha, poly_marginal_alpha
from auctions.pricing_rules.rules import ExponentialSupply, PricingRule, rule_from_spec
from auctions.primal_dual_ledger.ledger import beta_actual, ledger_from_trace
from auctions.settings import REL_TOL, WORKERS

logger = logging.getLogger(__name__)

WELFARE_FLOOR = 1e-12


@dataclass
class RatioReport:
    family: str
    params: Dict[str, Any]
    rule: str
    alpha: float = float("nan")
    beta: float = float("nan")
    welfare: float = float("nan")
    opt: float = float("nan")
    ratio: float = float("nan")
    guarantee_ok: bool = False
    failed: bool = False
    error: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)


def sweep_points(config: SweepConfig) -> List[Dict[str, Any]]:
    """Cartesian product of the swept values, in config order, on top of ``base``."""
    keys = list(config.sweep)
    if not keys:
        return [dict(config.base)] if config.base else []
    return [{**config.base, **dict(zip(keys, combo))} for combo in itertools.product(*(config.sweep[k] for k in keys))]


def build_instance(config: SweepConfig, point: Mapping[str, Any]) -> Instance:
    family = config.family
    if family == "staged-single":
        return gen_staged_single_item(
            cost_from_spec(config.cost),
            float(point["v_star"]),
            float(point.get("delta_v", 0.05)),
            float(point.get("delta_y", point.get("delta_v", 0.05))),
        )
    if family == "value-chain":
        v_min = float(point.get("v_min", 1.0))
        v_max = float(point["v_max"]) if "v_max" in point else v_min * float(point["rho"])
        return gen_limited_supply_value_chain(int(point["k"]), v_min, v_max, float(point.get("delta_v", 1.0)))
    if family == "bundle-stages":
        return gen_limited_supply_bundle_stages(
            int(point["m"]), int(point["k"]), int(point["i"]), int(point.get("seed", config.seed))
        )
    return gen_random_multi_minded(
        m=int(point["m"]),
        n=int(point["n"]),
        max_bundles=int(point.get("max_bundles", 3)),
        cost=cost_from_spec(config.cost),
        v_min=float(point.get("v_min", 1.0)),
        v_max=float(point.get("v_max", 10.0)),
        seed=int(point.get("seed", config.seed)),
        delta_y=float(point.get("delta_y", 1.0)),
    )


def initial_demand(rule: PricingRule, epsilon: float) -> float:
    """1/eps - 1 units for the integral guarantees, 0 for fractional and supply-k pricing."""
    if rule.integral and not isinstance(rule, ExponentialSupply):
        return 1.0 / epsilon - 1.0
    return 0.0


def run_point(config: SweepConfig, point: Mapping[str, Any]) -> RatioReport:
    report = RatioReport(family=config.family, params=dict(point), rule=config.rule.name)
    try:
        instance = build_instance(config, point)
        rule = rule_from_spec(config.rule, instance.cost, instance.m, instance.v_min, instance.v_max)
        guarantee = guaranteed_alpha(rule, config.epsilon)
        trace = run_mechanism(instance, rule, initial_demand(rule, config.epsilon))
        opt = opt_for(instance, config.opt, workers=1)
        w = welfare(trace)
        series = ledger_from_trace(trace)
        tol = REL_TOL * max(1.0, abs(opt.value))

        beta = beta_actual(series, guarantee.alpha)
        ok = series.primal[-1] >= opt.value / guarantee.alpha - beta - tol

        report.alpha = guarantee.alpha
        report.beta = beta
        report.welfare = w
        report.opt = opt.value
        report.ratio = opt.value / max(w, WELFARE_FLOOR)
        report.guarantee_ok = bool(ok)
        report.extra = {
            "n": instance.n,
            "opt_method": opt.method,
            "guarantee_ratio": guarantee.ratio,
            # beta-free form W >= OPT/ratio
            "ratio_ok": bool(w >= opt.value / guarantee.ratio - tol),
            "beta_theorem": guarantee.beta * instance.m,
            "discretization_residual": series.discretization_residual,
        }
        if isinstance(instance.cost, PolyMarginalCost):
            # closed-form reference for marginal cost a*l^d, next to the Gamma-based alpha
            report.extra["poly_marginal_alpha"] = poly_marginal_alpha(instance.cost.d, config.epsilon)
    except (AuctionError, ArithmeticError, ValueError, KeyError) as exc:
        logger.warning("sweep point %s failed: %s", dict(point), exc)
        report.failed = True
        report.guarantee_ok = False
        report.error = f"{type(exc).__name__}: {exc}"
    return report


def experiment_sweep(config: SweepConfig | Mapping[str, Any], workers: Optional[int] = None) -> List[RatioReport]:
    """One RatioReport per sweep point, in config order; failed points are flagged, not raised."""
    parsed = config if isinstance(config, SweepConfig) else SweepConfig.model_validate(config)
    points = sweep_points(parsed)
    workers = workers or max(parsed.workers, WORKERS)
    logger.info("sweeping %s / %s over %d points", parsed.family, parsed.rule.name, len(points))

    if workers <= 1 or len(points) <= 1:
        return [run_point(parsed, p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_point, [parsed] * len(points), points))

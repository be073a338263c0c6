"""Offline optima: exhaustive search for small instances and closed forms for the staged families."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import prod
from typing import List, Optional, Sequence, Tuple

import numpy as np

from auctions.auction_engine.mechanism import Instance, Items
from auctions.cost_models.models import CostModel, StepSupplyCost
from auctions.errors import DomainError, TooLarge
from auctions.settings import BRUTE_FORCE_MAX_BUYERS, BRUTE_FORCE_MAX_SPACE, REL_TOL, WORKERS

logger = logging.getLogger(__name__)

BRUTE_FORCE = "brute-force"
CLOSED_FORM_SINGLE_ITEM = "closed-form-single-item"
CLOSED_FORM_LIMITED_SUPPLY = "closed-form-limited-supply"


@dataclass(frozen=True)
class OptResult:
    value: float
    method: str
    allocation: Optional[Tuple[Items, ...]] = None


def search_space(instance: Instance) -> int:
    return prod(len(b.bundles) + 1 for b in instance.buyers)


def _cost_table(instance: Instance) -> np.ndarray:
    """f(c * delta_y) for c = 0..n units; entries past supply k are +inf."""
    counts = np.arange(instance.n + 1)
    cost = instance.cost
    if isinstance(cost, StepSupplyCost):
        limit = cost.k + REL_TOL
        allowed = counts * instance.delta_y <= limit
        table = np.full(counts.size, np.inf)
        table[allowed] = cost.f(counts[allowed] * instance.delta_y)
        return table
    return np.asarray(cost.f(counts * instance.delta_y), dtype=float)


def _search(instance: Instance, first: Optional[int] = None) -> Tuple[float, Tuple[Items, ...]]:
    """Depth-first search over every buyer's choice (empty or a listed bundle).

    With ``first`` set, buyer 0 is fixed to that choice index (0 = empty).
    """
    buyers = instance.buyers
    n, m = len(buyers), instance.m
    table = _cost_table(instance)
    monotone = bool(np.all(np.diff(table[np.isfinite(table)]) >= 0))

    choices: List[List[Tuple[Items, float]]] = [[((), 0.0)] + [(b.items, b.value) for b in buyer.bundles] for buyer in buyers]
    best_rest = [max(v for _, v in options) for options in choices]
    remaining = np.concatenate((np.cumsum(best_rest[::-1])[::-1], [0.0])) if n else np.zeros(1)

    counts = [0] * m
    picked: List[Items] = [()] * n
    best_value = -np.inf
    best_alloc: Tuple[Items, ...] = tuple(picked)

    def current_cost() -> float:
        return float(sum(table[c] for c in counts))

    def visit(i: int, value: float) -> None:
        nonlocal best_value, best_alloc
        if i == n:
            total = value - current_cost()
            if total > best_value:
                best_value, best_alloc = total, tuple(picked)
            return
        if monotone and value + remaining[i] - current_cost() <= best_value:
            return

        options = choices[i]
        indices = range(len(options)) if (i > 0 or first is None) else (first,)
        for idx in indices:
            items, v = options[idx]
            if any(table[counts[j - 1] + 1] == np.inf for j in items):
                continue
            for j in items:
                counts[j - 1] += 1
            picked[i] = items
            visit(i + 1, value + v)
            for j in items:
                counts[j - 1] -= 1
        picked[i] = ()

    if first is not None and n == 0:
        raise DomainError("cannot fix the first buyer of an empty instance")
    visit(0, 0.0)
    return float(best_value), best_alloc


def brute_force_opt(instance: Instance, workers: Optional[int] = None) -> OptResult:
    """Exact OPT = max over allocations of sum of values - sum_j f(y_j).

    Unlisted bundles are never assigned since they are worth 0. With
    ``workers > 1`` the first buyer's choices are searched in separate processes.
    """
    space = search_space(instance)
    if instance.n > BRUTE_FORCE_MAX_BUYERS or space > BRUTE_FORCE_MAX_SPACE:
        raise TooLarge(
            f"brute force limited to {BRUTE_FORCE_MAX_BUYERS} buyers and {BRUTE_FORCE_MAX_SPACE} assignments "
            f"(got n={instance.n}, space={space})"
        )
    workers = WORKERS if workers is None else workers
    logger.debug("brute force over %d assignments with %d worker(s)", space, workers)

    if workers <= 1 or instance.n < 2:
        value, alloc = _search(instance)
        return OptResult(value=value, method=BRUTE_FORCE, allocation=alloc)

    firsts = list(range(len(instance.buyers[0].bundles) + 1))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_search, [instance] * len(firsts), firsts))
    value, alloc = results[0]
    for cand_value, cand_alloc in results[1:]:
        if cand_value > value:
            value, alloc = cand_value, cand_alloc
    return OptResult(value=value, method=BRUTE_FORCE, allocation=alloc)


def opt_single_item_staged(cost: CostModel, v_star: float) -> float:
    """OPT of the staged single-item family with top value v*: f*(v*)."""
    if v_star < 0:
        raise DomainError(f"v* must be >= 0, got {v_star}")
    return cost.conjugate(v_star)


def opt_limited_supply_staged(m: int, k: int, r: float, i: int) -> float:
    """OPT of the bundle-stage family after stage i: k * r^i."""
    return float(k * r**i)


def opt_value_stage_family(instance: Instance) -> OptResult:
    """Closed-form OPT from a generated instance's family metadata."""
    params = instance.params
    if instance.family == "staged-single":
        return OptResult(opt_single_item_staged(instance.cost, params["v_star"]), CLOSED_FORM_SINGLE_ITEM)
    if instance.family == "value-chain":
        return OptResult(float(params["k"] * params["v_top"]), CLOSED_FORM_LIMITED_SUPPLY)
    if instance.family == "bundle-stages":
        value = opt_limited_supply_staged(instance.m, params["k"], params["r"], params["i"])
        return OptResult(value, CLOSED_FORM_LIMITED_SUPPLY)
    raise DomainError(f"no closed-form optimum for family {instance.family!r}")


def opt_for(instance: Instance, method: str = "auto", workers: Optional[int] = None) -> OptResult:
    """Brute force when the instance is small enough, else the family closed form."""
    if method == "closed-form":
        return opt_value_stage_family(instance)
    if method == "brute-force":
        return brute_force_opt(instance, workers)
    if instance.n <= BRUTE_FORCE_MAX_BUYERS and search_space(instance) <= BRUTE_FORCE_MAX_SPACE:
        return brute_force_opt(instance, workers)
    return opt_value_stage_family(instance)


def sampled_alternatives(instance: Instance, allocations: Sequence[Tuple[Items, ...]]) -> List[float]:
    """Objective of explicit allocations, for checking that OPT dominates them."""
    table = _cost_table(instance)
    out = []
    for alloc in allocations:
        counts = np.zeros(instance.m, dtype=int)
        value = 0.0
        for buyer, items in zip(instance.buyers, alloc):
            value += buyer.value_of(items)
            for j in items:
                counts[j - 1] += 1
        out.append(value - float(table[counts].sum()))
    return out

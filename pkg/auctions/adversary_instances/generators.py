"""Staged lower-bound families and seeded random multi-minded instances."""
from __future__ import annotations

import logging
import math
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from auctions.auction_engine.mechanism import Bundle, Buyer, Instance
from auctions.cost_models.models import CostModel, StepSupplyCost
from auctions.errors import DomainError, TooLarge
from auctions.settings import BUNDLE_LIST_CAP, BUYER_CAP

logger = logging.getLogger(__name__)


def _stage_values(start: float, stop: float, step: float) -> List[float]:
    count = int(math.floor((stop - start) / step + 1e-9))
    return [start + s * step for s in range(count + 1)]


def gen_staged_single_item(
    cost: CostModel,
    v_star: float,
    delta_v: float,
    delta_y: float,
    cap: Optional[int] = None,
) -> Instance:
    """Stages v = dv, 2dv, ..., v*; stage v brings ceil(f*'(v)/dy) buyers wanting dy units at v each.

    Arrivals are ordered by increasing stage value.
    """
    cap = BUYER_CAP if cap is None else cap
    if not delta_v > 0 or not delta_y > 0:
        raise DomainError(f"delta_v and delta_y must be positive, got {delta_v}, {delta_y}")
    if v_star < 0:
        raise DomainError(f"v* must be >= 0, got {v_star}")
    if not cost.strictly_convex:
        raise DomainError(f"staged single-item instances need a strictly convex cost, got {cost.kind}")

    stages = [delta_v * s for s in range(1, int(math.floor(v_star / delta_v + 1e-9)) + 1)]
    counts = [math.ceil(cost.conjugate_prime(v) / delta_y - 1e-9) for v in stages]
    total = sum(counts)
    if total > cap:
        raise TooLarge(f"staged instance would have {total} buyers (cap {cap})")

    buyers: List[Buyer] = []
    for s, (v, count) in enumerate(zip(stages, counts), start=1):
        bundle = (Bundle(items=(1,), value=v * delta_y),)
        buyers.extend(Buyer(id=f"s{s}-{b}", bundles=bundle) for b in range(count))
    logger.info("staged single-item: %d stages, %d buyers", len(stages), total)

    return Instance(
        m=1,
        delta_y=delta_y,
        cost=cost,
        buyers=tuple(buyers),
        family="staged-single",
        params={"v_star": v_star, "delta_v": delta_v, "delta_y": delta_y},
    )


def gen_limited_supply_value_chain(k: int, v_min: float, v_max: float, delta_v: float, m: int = 1) -> Instance:
    """One item with k copies; k unit-demand buyers at each value v_min, v_min+dv, ..., <= v_max."""
    if m != 1:
        raise DomainError("the value chain is a single-item family")
    if not 0 < v_min <= v_max:
        raise DomainError(f"need 0 < v_min <= v_max, got {v_min}, {v_max}")
    if not delta_v > 0:
        raise DomainError(f"delta_v must be positive, got {delta_v}")

    values = _stage_values(v_min, v_max, delta_v)
    buyers = tuple(
        Buyer(id=f"v{s}-{b}", bundles=(Bundle(items=(1,), value=v),))
        for s, v in enumerate(values)
        for b in range(k)
    )
    return Instance(
        m=1,
        delta_y=1.0,
        cost=StepSupplyCost(k=k),
        buyers=buyers,
        v_min=v_min,
        v_max=v_max,
        family="value-chain",
        params={"k": k, "v_min": v_min, "v_max": v_max, "delta_v": delta_v, "v_top": values[-1]},
    )


def _stage_bundles(m: int, size: int, rng: np.random.Generator) -> List[Tuple[int, ...]]:
    if math.comb(m, size) <= BUNDLE_LIST_CAP:
        return list(combinations(range(1, m + 1), size))
    chosen: set[Tuple[int, ...]] = set()
    while len(chosen) < BUNDLE_LIST_CAP:
        pick = rng.choice(m, size=size, replace=False) + 1
        chosen.add(tuple(sorted(int(j) for j in pick)))
    return sorted(chosen)


def gen_limited_supply_bundle_stages(m: int, k: int, i: int, seed: int = 0) -> Instance:
    """Stages j = 0..i of k*r^j buyers valuing any bundle of size ceil(m/r^j) at 1.

    r = max(2, round(log2 m)); both the raw log and the rounded r go into params.
    """
    if m < 1 or k < 1 or i < 0:
        raise DomainError(f"need m, k >= 1 and i >= 0, got m={m}, k={k}, i={i}")
    log_m = math.log2(m) if m > 1 else 0.0
    r = max(2, round(log_m))
    if r**i > m:
        raise DomainError(f"r^i = {r}^{i} exceeds m = {m}")

    rng = np.random.default_rng(seed)
    buyers: List[Buyer] = []
    for j in range(i + 1):
        size = math.ceil(m / r**j)
        bundles = tuple(Bundle(items=items, value=1.0) for items in _stage_bundles(m, size, rng))
        count = k * r**j
        if len(buyers) + count > BUYER_CAP:
            raise TooLarge(f"bundle-stage instance exceeds {BUYER_CAP} buyers")
        buyers.extend(Buyer(id=f"j{j}-{b}", bundles=bundles) for b in range(count))

    return Instance(
        m=m,
        delta_y=1.0,
        cost=StepSupplyCost(k=k),
        buyers=tuple(buyers),
        v_min=1.0,
        v_max=1.0,
        family="bundle-stages",
        params={"m": m, "k": k, "i": i, "r": r, "log2_m": log_m, "seed": seed},
    )


def gen_random_multi_minded(
    m: int,
    n: int,
    max_bundles: int,
    cost: CostModel,
    v_min: float,
    v_max: float,
    seed: int,
    delta_y: float = 1.0,
) -> Instance:
    """n buyers, each listing 1..max_bundles distinct random bundles with values uniform in [v_min, v_max]."""
    if not 1 <= max_bundles <= min(BUNDLE_LIST_CAP, 2**m - 1):
        raise DomainError(f"max_bundles must lie in 1..{min(BUNDLE_LIST_CAP, 2**m - 1)}, got {max_bundles}")
    if not 0 < v_min <= v_max:
        raise DomainError(f"need 0 < v_min <= v_max, got {v_min}, {v_max}")

    rng = np.random.default_rng(seed)
    buyers: List[Buyer] = []
    for b in range(n):
        wanted = int(rng.integers(1, max_bundles + 1))
        seen: dict[Tuple[int, ...], float] = {}
        while len(seen) < wanted:
            size = int(rng.integers(1, m + 1))
            items = tuple(sorted(int(j) + 1 for j in rng.choice(m, size=size, replace=False)))
            if items not in seen:
                seen[items] = float(rng.uniform(v_min, v_max))
        buyers.append(Buyer(id=f"b{b}", bundles=tuple(Bundle(items=it, value=v) for it, v in seen.items())))

    return Instance(
        m=m,
        delta_y=delta_y,
        cost=cost,
        buyers=tuple(buyers),
        v_min=v_min,
        v_max=v_max,
        family="random",
        params={"m": m, "n": n, "max_bundles": max_bundles, "seed": seed},
    )

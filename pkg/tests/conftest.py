from __future__ import annotations

from pathlib import Path

import pytest

from auctions.auction_engine.mechanism import Bundle, Buyer, Instance
from auctions.cost_models.models import LinearMarginalCost, PowerCost, StepSupplyCost
from instance_store import InstanceStore

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def samples_dir() -> Path:
    return SAMPLES


@pytest.fixture
def store() -> InstanceStore:
    return InstanceStore(str(SAMPLES))


@pytest.fixture
def power_cost() -> PowerCost:
    """f(y) = y^2/2, so f'(y) = y and f*(p) = p^2/2."""
    return PowerCost(a=0.5, gamma=1)


@pytest.fixture
def cubic_cost() -> PowerCost:
    """f(y) = y^3/3, so f'(y) = y^2."""
    return PowerCost(a=1.0 / 3.0, gamma=2)


@pytest.fixture
def linear_cost() -> LinearMarginalCost:
    return LinearMarginalCost(a=1.0, b=0.0)


@pytest.fixture
def two_item_instance(store: InstanceStore) -> Instance:
    return store.load_instance("instance_two_items.json")


@pytest.fixture
def supply_instance() -> Instance:
    """One item, one copy, two buyers who both value it at v_max."""
    buyers = tuple(Buyer(id=f"b{i}", bundles=(Bundle(items=(1,), value=2.0),)) for i in range(2))
    return Instance(m=1, delta_y=1.0, cost=StepSupplyCost(k=1), buyers=buyers, v_min=1.0, v_max=2.0)

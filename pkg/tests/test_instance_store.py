from __future__ import annotations

import json

import pytest

from auctions.auction_engine.mechanism import run_mechanism
from auctions.cost_models.models import PowerCost
from auctions.pricing_rules.rules import power_rule
from instance_store import InstanceStore


def test_loads_samples(store):
    assert store.load_cost("cost_power.json") == PowerCost(a=0.5, gamma=1)
    assert store.load_instance("instance_two_items.json").n == 3
    assert store.load_sweep_config("sweep_power.json").family == "staged-single"


def test_instance_and_trace_files(tmp_path, two_item_instance):
    store = InstanceStore(str(tmp_path))
    path = store.save_instance("nested/instance.json", two_item_instance)
    assert path.startswith(str(tmp_path))
    assert store.load_instance("nested/instance.json") == two_item_instance

    trace = run_mechanism(two_item_instance, power_rule(two_item_instance.cost))
    store.save_trace("trace.json", trace)
    payload = json.loads((tmp_path / "trace.json").read_text(encoding="utf-8"))
    assert payload["rule"] == {"name": "power", "params": {}}
    assert store.load_trace("trace.json").steps == trace.steps


def test_absolute_paths_ignore_base_dir(tmp_path, two_item_instance):
    target = tmp_path / "abs.json"
    InstanceStore("/nonexistent").save_instance(str(target), two_item_instance)
    assert target.exists()


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        InstanceStore(str(tmp_path)).load_cost("missing.json")

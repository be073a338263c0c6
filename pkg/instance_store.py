"""JSON file persistence for costs, instances, traces and sweep configs."""
from __future__ import annotations

import json
import os
from typing import Any, Dict

from auctions.auction_engine.mechanism import (
    AuctionTrace,
    Instance,
    instance_from_spec,
    instance_to_spec,
    trace_from_dict,
    trace_to_dict,
)
from auctions.auction_engine.schema import SweepConfig
from auctions.cost_models.constructions import cost_from_spec
from auctions.cost_models.models import CostModel


class InstanceStore:
    """Reads and writes the flat JSON files the CLI works with."""

    def __init__(self, base_dir: str = "."):
        self.base_dir = os.path.expanduser(base_dir)

    # ------------------------------------------------------------------
    # Raw JSON helpers
    # ------------------------------------------------------------------
    def _resolve(self, path: str) -> str:
        path = os.path.expanduser(path)
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def load_json(self, path: str) -> Any:
        with open(self._resolve(path), "r", encoding="utf-8") as handle:
            return json.load(handle)

    def save_json(self, path: str, payload: Any) -> str:
        target = self._resolve(path)
        dirname = os.path.dirname(target)
        if dirname:
            os.makedirs(dirname, exist_ok=True)
        with open(target, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, ensure_ascii=False, indent=2)
            handle.write("\n")
        return target

    # ------------------------------------------------------------------
    # Typed loaders
    # ------------------------------------------------------------------
    def load_cost(self, path: str) -> CostModel:
        return cost_from_spec(self.load_json(path))

    def load_instance(self, path: str) -> Instance:
        return instance_from_spec(self.load_json(path))

    def save_instance(self, path: str, instance: Instance) -> str:
        return self.save_json(path, instance_to_spec(instance))

    def load_trace(self, path: str) -> AuctionTrace:
        return trace_from_dict(self.load_json(path))

    def save_trace(self, path: str, trace: AuctionTrace) -> str:
        return self.save_json(path, trace_to_dict(trace))

    def load_sweep_config(self, path: str) -> SweepConfig:
        payload: Dict[str, Any] = self.load_json(path)
        return SweepConfig.model_validate(payload)

"""Simulator tolerances and planner settings."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class SimConfig:
    # informed RRT*
    rrt_step: float = 0.05
    rrt_neighbor_radius: float = 0.3
    rrt_budget: int = 2000
    rrt_goal_tolerance: float = 0.02
    rrt_goal_bias: float = 0.1
    collision_resolution: float = 0.01
    # tolerances
    position_tolerance: float = 0.02
    yaw_tolerance_deg: float = 5.0
    grasp_radius: float = 0.04
    # arm contact model
    gripper_half_size: float = 0.01
    sweep_step: float = 0.005
    contact_z_tolerance: float = 0.01
    ride_tolerance: float = 0.01
    # quadruped
    walk_height_tolerance: float = 0.02
    walk_over_height: float = 0.05
    push_margin: float = 0.02
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown simulator config field(s): {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "SimConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return asdict(self)

"""Kinematic simulator, path planner and skill environment."""

from .config import SimConfig
from .env import SimEnvironment
from .rrt import FreeSpace, PathNotFound, PathPlan, plan_path
from .world import (
    CONSTRAINT_ERROR_KINDS,
    SKILL_ERROR_KINDS,
    SUCCESS_CHECKS,
    PerceptionOracle,
    SkillError,
    World,
    check_success,
    is_success,
    task_success,
)

__all__ = [
    "CONSTRAINT_ERROR_KINDS", "SKILL_ERROR_KINDS", "SUCCESS_CHECKS", "FreeSpace", "PathNotFound", "PathPlan",
    "PerceptionOracle", "SimConfig", "SimEnvironment", "SkillError", "World", "check_success", "is_success",
    "plan_path", "task_success",
]

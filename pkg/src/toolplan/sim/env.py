"""Adapter exposing a :class:`World` to the plan-script interpreter."""

from __future__ import annotations

import numpy as np

from ..planscript.signatures import SIGNATURES
from ..planscript.values import Name, PlanScriptRuntimeError, Scalar, Vector
from .world import World


def _arg(kind: str, value, skill: str):
    if kind == "name":
        if not isinstance(value, Name):
            raise PlanScriptRuntimeError("type_error", f"{skill}: expected an object name")
        return value.value
    if kind == "vec":
        if not isinstance(value, Vector) or len(value.values) != 3:
            raise PlanScriptRuntimeError("type_error", f"{skill}: expected a 3-vector")
        if value.unit not in (None, "m"):
            raise PlanScriptRuntimeError("type_error", f"{skill}: position must be in meters, not {value.unit}")
        return np.array(value.values, dtype=float)
    if kind == "angle":
        if not isinstance(value, Scalar):
            raise PlanScriptRuntimeError("type_error", f"{skill}: expected an angle")
        if value.unit not in (None, "rad"):
            raise PlanScriptRuntimeError("type_error", f"{skill}: angle must be in radians, not {value.unit}")
        return float(value.value)
    raise ValueError(kind)


class SimEnvironment:
    """Dispatches skill calls by name, converting plan-script values."""

    def __init__(self, world: World):
        self.world = world

    @property
    def last_detail(self):
        return self.world.last_detail

    def call(self, skill: str, args: list):
        sig = SIGNATURES.get(skill)
        if sig is None or skill not in self.world.scene.robot.skills:
            raise PlanScriptRuntimeError("unknown_skill", f"the robot has no skill {skill!r}")
        if not sig.min_arity <= len(args) <= sig.max_arity:
            raise PlanScriptRuntimeError("arity", f"{skill} takes {sig.min_arity}..{sig.max_arity} arguments")
        py = [_arg(p.kind, a, skill) for p, a in zip(sig.params, args)]
        result = self.world.call(skill, *py)
        if sig.returns == "vec":
            return Vector(np.asarray(result, dtype=float), "m")
        return None

    def snapshot(self) -> dict:
        return self.world.snapshot()

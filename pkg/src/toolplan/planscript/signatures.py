"""Skill signatures shared by the static checker and the simulator adapter.

Parameter kinds: ``name`` (object-name string), ``vec`` (3-vector, meters),
``angle`` (scalar, radians).  Trailing parameters marked optional may be
omitted.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Param:
    name: str
    kind: str
    optional: bool = False


@dataclass(frozen=True)
class Signature:
    name: str
    params: tuple[Param, ...]
    returns: str  # vec | none
    mutating: bool

    @property
    def min_arity(self) -> int:
        return sum(1 for p in self.params if not p.optional)

    @property
    def max_arity(self) -> int:
        return len(self.params)


SIGNATURES = {
    s.name: s
    for s in (
        Signature("get_position", (Param("object", "name"),), "vec", False),
        Signature("get_size", (Param("object", "name"),), "vec", False),
        Signature("open_gripper", (), "none", True),
        Signature("close_gripper", (), "none", True),
        Signature("move_to_position", (Param("target", "vec"),), "none", True),
        Signature("walk_to_position", (Param("target", "vec"),), "none", True),
        Signature("climb_to_position", (Param("target", "vec"),), "none", True),
        Signature(
            "push_to_position",
            (Param("object", "name"), Param("target", "vec"), Param("yaw", "angle", optional=True)),
            "none",
            True,
        ),
    )
}

MOTION_SKILLS = frozenset({"move_to_position", "walk_to_position", "climb_to_position", "push_to_position"})
QUERY_SKILLS = frozenset(n for n, s in SIGNATURES.items() if not s.mutating)

SKILL_DOCS = {
    "get_position": "get_position(object) returns the center of the object as [x, y, z] in meters.",
    "get_size": "get_size(object) returns the world-frame extents of the object as [x, y, z] in meters.",
    "open_gripper": "open_gripper() opens the gripper and releases any held object.",
    "close_gripper": "close_gripper() closes the gripper and grasps the object whose graspable point is nearest.",
    "move_to_position": ("move_to_position(target) moves the gripper to the target, one axis at a time "
                         "in the robot's configured order; a held object moves with it."),
    "walk_to_position": ("walk_to_position(target) walks to the target around obstacles; the robot cannot "
                         "step onto a higher or lower surface."),
    "climb_to_position": ("climb_to_position(target) moves in a straight line to the target, climbing "
                          "onto or off surfaces on the way."),
    "push_to_position": ("push_to_position(object, target, yaw) pushes the object until its center reaches "
                         "the target: first it rotates the object, then it pushes along y, then along x."),
}

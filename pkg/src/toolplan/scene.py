"""World, robot, constraint and task description, plus language rendering.

Scenes are immutable once loaded.  The JSON schema is versioned and the
loader refuses unknown fields so that typos in hand-written scene files
fail loudly instead of silently taking defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import geometry as geo

SCHEMA_VERSION = 1

ARM_SKILLS = ("get_position", "get_size", "open_gripper", "close_gripper", "move_to_position")
QUADRUPED_SKILLS = (
    "get_position",
    "get_size",
    "walk_to_position",
    "climb_to_position",
    "push_to_position",
)
LEGAL_SKILLS = {"arm": ARM_SKILLS, "quadruped": QUADRUPED_SKILLS}

TASK_IDS = (
    "milk-reaching",
    "can-grasping",
    "button-pressing",
    "sofa-traversing",
    "sofa-climbing",
    "cube-lifting",
)
AXIS_ORDERS = ("straight", "xyz", "xzy", "yxz", "yzx", "zxy", "zyx")
MECHANISM_KINDS = ("lever", "magnetic_attach", "bridge", "button")


class SceneFormatError(ValueError):
    """Raised for malformed scene or task files."""


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    @classmethod
    def of(cls, v: Iterable[float]) -> "Vec3":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in (self.x, self.y, self.z))


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    position: Vec3
    size: Vec3
    yaw: float = 0.0
    mass: float = 0.0
    material: str = ""
    graspable_offset: Vec3 = Vec3(0.0, 0.0, 0.0)
    is_support_surface: bool = False
    tags: frozenset[str] = frozenset()

    def box(self):
        return geo.box_of(self.position.as_array(), self.size.as_list(), self.yaw)

    @property
    def graspable_point(self) -> np.ndarray:
        return self.position.as_array() + self.graspable_offset.as_array()


@dataclass(frozen=True)
class RobotSpec:
    embodiment: str
    skills: tuple[str, ...]
    base_position: Vec3
    base_yaw: float = 0.0
    workspace_center: Vec3 | None = None
    workspace_radius: float | None = None
    gap_limit: float | None = None
    climb_step_limit: float | None = None
    push_mass_limit: float | None = None
    half_width: float = 0.15
    home_position: Vec3 | None = None
    axis_order: str = "straight"


@dataclass(frozen=True)
class Constraint:
    id: str
    kind: str
    text: str
    predicate: str


@dataclass(frozen=True)
class MechanismRule:
    id: str
    kind: str
    participants: dict[str, str]
    trigger: dict[str, Any] = field(default_factory=dict)
    effect: str = ""

    def __hash__(self) -> int:
        return hash((self.id, self.kind))


@dataclass(frozen=True)
class SceneConfig:
    objects: tuple[ObjectSpec, ...]
    robot: RobotSpec
    constraints: tuple[Constraint, ...] = ()
    mechanisms: tuple[MechanismRule, ...] = ()
    floor_extent: tuple[float, float, float, float] = (-5.0, -5.0, 5.0, 5.0)
    floor_name: str = "ground"
    rigid_groups: tuple[tuple[str, ...], ...] = ()

    def object(self, name: str) -> ObjectSpec:
        for o in self.objects:
            if o.name == name:
                return o
        raise KeyError(name)

    def names(self) -> list[str]:
        return [o.name for o in self.objects]


@dataclass(frozen=True)
class TaskSpec:
    id: str
    instruction: str
    scene: SceneConfig
    success_check: str
    gold: str
    variant: str = "default"

    @property
    def key(self) -> str:
        return self.id if self.variant == "default" else f"{self.id}:{self.variant}"


# ---------------------------------------------------------------------------
# JSON (de)serialisation

def _take(d: dict, allowed: set[str], required: set[str], where: str) -> dict:
    if not isinstance(d, dict):
        raise SceneFormatError(f"{where}: expected an object")
    unknown = set(d) - allowed
    if unknown:
        raise SceneFormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise SceneFormatError(f"{where}: missing field(s) {sorted(missing)}")
    return d


def _vec(v, where: str) -> Vec3:
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise SceneFormatError(f"{where}: expected a 3-vector")
    try:
        return Vec3.of(v)
    except (TypeError, ValueError) as exc:
        raise SceneFormatError(f"{where}: {exc}") from None


def object_from_dict(d: dict) -> ObjectSpec:
    allowed = {"name", "position", "size", "yaw", "mass", "material",
               "graspable_offset", "is_support_surface", "tags"}
    d = _take(d, allowed, {"name", "position", "size"}, f"object {d.get('name', '?')}")
    where = f"object {d['name']}"
    return ObjectSpec(
        name=str(d["name"]),
        position=_vec(d["position"], where + ".position"),
        size=_vec(d["size"], where + ".size"),
        yaw=float(d.get("yaw", 0.0)),
        mass=float(d.get("mass", 0.0)),
        material=str(d.get("material", "")),
        graspable_offset=_vec(d.get("graspable_offset", [0, 0, 0]), where + ".graspable_offset"),
        is_support_surface=bool(d.get("is_support_surface", False)),
        tags=frozenset(d.get("tags", [])),
    )


def object_to_dict(o: ObjectSpec) -> dict:
    out: dict[str, Any] = {
        "name": o.name,
        "position": o.position.as_list(),
        "size": o.size.as_list(),
        "yaw": o.yaw,
        "mass": o.mass,
        "material": o.material,
        "graspable_offset": o.graspable_offset.as_list(),
        "is_support_surface": o.is_support_surface,
        "tags": sorted(o.tags),
    }
    return out


def robot_from_dict(d: dict) -> RobotSpec:
    allowed = {"embodiment", "skills", "base_position", "base_yaw", "workspace_center",
               "workspace_radius", "gap_limit", "climb_step_limit", "push_mass_limit",
               "half_width", "home_position", "axis_order"}
    d = _take(d, allowed, {"embodiment", "skills", "base_position"}, "robot")

    def opt_vec(k):
        return _vec(d[k], f"robot.{k}") if d.get(k) is not None else None

    def opt_float(k):
        return float(d[k]) if d.get(k) is not None else None

    return RobotSpec(
        embodiment=str(d["embodiment"]),
        skills=tuple(d["skills"]),
        base_position=_vec(d["base_position"], "robot.base_position"),
        base_yaw=float(d.get("base_yaw", 0.0)),
        workspace_center=opt_vec("workspace_center"),
        workspace_radius=opt_float("workspace_radius"),
        gap_limit=opt_float("gap_limit"),
        climb_step_limit=opt_float("climb_step_limit"),
        push_mass_limit=opt_float("push_mass_limit"),
        half_width=float(d.get("half_width", 0.15)),
        home_position=opt_vec("home_position"),
        axis_order=str(d.get("axis_order", "straight")),
    )


def robot_to_dict(r: RobotSpec) -> dict:
    out: dict[str, Any] = {
        "embodiment": r.embodiment,
        "skills": list(r.skills),
        "base_position": r.base_position.as_list(),
        "base_yaw": r.base_yaw,
        "half_width": r.half_width,
        "axis_order": r.axis_order,
    }
    for k in ("workspace_radius", "gap_limit", "climb_step_limit", "push_mass_limit"):
        if getattr(r, k) is not None:
            out[k] = getattr(r, k)
    for k in ("workspace_center", "home_position"):
        if getattr(r, k) is not None:
            out[k] = getattr(r, k).as_list()
    return out


def scene_from_dict(d: dict) -> SceneConfig:
    allowed = {"objects", "robot", "constraints", "mechanisms", "floor_extent",
               "floor_name", "rigid_groups"}
    d = _take(d, allowed, {"objects", "robot"}, "scene")
    constraints = []
    for c in d.get("constraints", []):
        c = _take(c, {"id", "kind", "text", "predicate"}, {"id", "kind", "text", "predicate"}, "constraint")
        constraints.append(Constraint(str(c["id"]), str(c["kind"]), str(c["text"]), str(c["predicate"])))
    mechanisms = []
    for m in d.get("mechanisms", []):
        m = _take(m, {"id", "kind", "participants", "trigger", "effect"}, {"id", "kind", "participants"}, "mechanism")
        mechanisms.append(MechanismRule(
            id=str(m["id"]), kind=str(m["kind"]),
            participants={str(k): str(v) for k, v in m["participants"].items()},
            trigger=dict(m.get("trigger", {})), effect=str(m.get("effect", "")),
        ))
    extent = d.get("floor_extent", [-5.0, -5.0, 5.0, 5.0])
    if len(extent) != 4:
        raise SceneFormatError("scene.floor_extent: expected [xmin, ymin, xmax, ymax]")
    return SceneConfig(
        objects=tuple(object_from_dict(o) for o in d["objects"]),
        robot=robot_from_dict(d["robot"]),
        constraints=tuple(constraints),
        mechanisms=tuple(mechanisms),
        floor_extent=tuple(float(v) for v in extent),
        floor_name=str(d.get("floor_name", "ground")),
        rigid_groups=tuple(tuple(g) for g in d.get("rigid_groups", [])),
    )


def scene_to_dict(s: SceneConfig) -> dict:
    return {
        "objects": [object_to_dict(o) for o in s.objects],
        "robot": robot_to_dict(s.robot),
        "constraints": [c.__dict__.copy() for c in s.constraints],
        "mechanisms": [
            {"id": m.id, "kind": m.kind, "participants": dict(m.participants),
             "trigger": dict(m.trigger), "effect": m.effect}
            for m in s.mechanisms
        ],
        "floor_extent": list(s.floor_extent),
        "floor_name": s.floor_name,
        "rigid_groups": [list(g) for g in s.rigid_groups],
    }


def task_from_dict(d: dict) -> TaskSpec:
    allowed = {"schema_version", "id", "variant", "instruction", "scene", "success_check", "gold"}
    d = _take(d, allowed, {"schema_version", "id", "instruction", "scene", "success_check"}, "task")
    if d["schema_version"] != SCHEMA_VERSION:
        raise SceneFormatError(f"unsupported schema_version {d['schema_version']!r}")
    return TaskSpec(
        id=str(d["id"]),
        instruction=str(d["instruction"]),
        scene=scene_from_dict(d["scene"]),
        success_check=str(d["success_check"]),
        gold=str(d.get("gold", d["id"])),
        variant=str(d.get("variant", "default")),
    )


def task_to_dict(t: TaskSpec) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": t.id,
        "variant": t.variant,
        "instruction": t.instruction,
        "success_check": t.success_check,
        "gold": t.gold,
        "scene": scene_to_dict(t.scene),
    }


def load_task(path: str | Path) -> TaskSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: invalid JSON ({exc})") from None
    return task_from_dict(data)


def save_task(task: TaskSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(task_to_dict(task), indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Constraint predicates

def _gap_between(a: ObjectSpec, b: ObjectSpec) -> float:
    fa, fb = a.box(), b.box()
    lo = (fa[0][:2], fa[1][:2])
    hi = (fb[0][:2], fb[1][:2])
    gap = np.maximum(0.0, np.maximum(lo[0] - hi[1], hi[0] - lo[1]))
    return float(np.linalg.norm(gap))


def horizontal_gap(a: ObjectSpec, b: ObjectSpec) -> float:
    """Distance between the floor footprints of two objects."""
    return _gap_between(a, b)


def _outside_workspace(scene: SceneConfig, name: str) -> bool:
    r = scene.robot
    p = scene.object(name).graspable_point
    return float(np.linalg.norm(p - r.workspace_center.as_array())) > r.workspace_radius


def _gap_exceeds(scene: SceneConfig, a: str, b: str) -> bool:
    return horizontal_gap(scene.object(a), scene.object(b)) > scene.robot.gap_limit


def _height_exceeds(scene: SceneConfig, name: str) -> bool:
    return float(scene.object(name).box()[1][2]) > scene.robot.climb_step_limit


def _mass_exceeds(scene: SceneConfig, name: str) -> bool:
    return scene.object(name).mass > scene.robot.push_mass_limit


def _not_liftable(scene: SceneConfig, name: str) -> bool:
    return "cannot_lift" in scene.object(name).tags


def _robot_limit(scene: SceneConfig, attr: str) -> bool:
    return getattr(scene.robot, attr, None) is not None


PREDICATES = {
    "outside_workspace": (_outside_workspace, 1),
    "gap_exceeds_limit": (_gap_exceeds, 2),
    "height_exceeds_climb": (_height_exceeds, 1),
    "mass_exceeds_push": (_mass_exceeds, 1),
    "not_liftable": (_not_liftable, 1),
    "robot_limit": (_robot_limit, 1),
}


def parse_predicate(text: str) -> tuple[str, list[str]]:
    name, _, rest = text.partition(":")
    args = [a.strip() for a in rest.split(",")] if rest else []
    return name.strip(), args


def constraint_active(constraint: Constraint, scene: SceneConfig) -> bool:
    """Evaluate the constraint's predicate against the initial configuration."""
    name, args = parse_predicate(constraint.predicate)
    fn, _ = PREDICATES[name]
    return bool(fn(scene, *args))


# ---------------------------------------------------------------------------
# Rendering

def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _fmt_vec(v) -> str:
    return "(" + ", ".join(_fmt(float(c)) for c in v) + ")"


def resting_on(scene: SceneConfig, name: str) -> str:
    """Name of the object ``name`` initially rests on, or the floor name."""
    me = scene.object(name)
    lo, hi = me.box()
    best, best_top = scene.floor_name, 0.0
    for o in scene.objects:
        if o.name == name:
            continue
        olo, ohi = o.box()
        if abs(ohi[2] - lo[2]) <= 1e-3 and geo.xy_overlap((lo, hi), (olo, ohi)) and ohi[2] > best_top:
            best, best_top = o.name, float(ohi[2])
    return best


def _surface_under(scene: SceneConfig, p: Vec3) -> str:
    best, best_top = scene.floor_name, 0.0
    for o in scene.objects:
        lo, hi = o.box()
        if (abs(hi[2] - p.z) <= 1e-3 and geo.rect_contains(geo.footprint((lo, hi)), p.x, p.y)
                and hi[2] > best_top):
            best, best_top = o.name, float(hi[2])
    return best


def _object_sentence(scene: SceneConfig, o: ObjectSpec) -> str:
    support = resting_on(scene, o.name)
    parts = [f"there is a {o.name} on the {support}."]
    for group in scene.rigid_groups:
        if o.name in group:
            others = [g for g in group if g != o.name]
            parts.append(f"It is rigidly attached to {', '.join(others)}.")
    parts.append(f"Position: {_fmt_vec(o.position.as_list())} m.")
    parts.append(f"Size (width, length, height): {_fmt_vec(o.size.as_list())} m.")
    if o.yaw:
        parts.append(f"Yaw: {_fmt(o.yaw)} rad.")
    parts.append(f"Mass: {_fmt(o.mass)} kg.")
    if o.material:
        parts.append(f"Material: {o.material}.")
    if any(o.graspable_offset.as_list()):
        parts.append(f"Graspable point: {_fmt_vec(o.graspable_point)} m.")
    if o.is_support_surface:
        parts.append("The robot can stand on it.")
    if o.tags:
        parts.append(f"Properties: {', '.join(sorted(o.tags))}.")
    return f"- {o.name}: " + " ".join(parts)


def _robot_sentence(scene: SceneConfig) -> str:
    r = scene.robot
    if r.embodiment == "arm":
        s = (f"The robot is a robotic arm mounted on the {scene.floor_name} at "
             f"{_fmt_vec(r.base_position.as_list())} m.")
        if r.home_position is not None:
            s += f" Its gripper starts open at {_fmt_vec(r.home_position.as_list())} m."
        return s
    support = _surface_under(scene, r.base_position)
    return (f"The robot is a quadrupedal robot. The robot is on the {support} at "
            f"{_fmt_vec(r.base_position.as_list())} m.")


def render_environment_description(scene: SceneConfig) -> str:
    lines = []
    if scene.objects:
        lines.append("Objects:")
        lines.extend(_object_sentence(scene, o) for o in scene.objects)
    lines.append("Robot:")
    lines.append(_robot_sentence(scene))
    return "\n".join(lines)


def render_constraint_description(constraints: Iterable[Constraint]) -> str:
    order = {"environment": 0, "robot": 1}
    ordered = sorted(constraints, key=lambda c: (order.get(c.kind, 2), c.id))
    return "\n".join(f"- {c.text.strip()}" for c in ordered)


def compose_query(task: TaskSpec) -> str:
    sections = [
        "Task:\n" + task.instruction.strip(),
        "Environment:\n" + render_environment_description(task.scene),
    ]
    constraints = render_constraint_description(task.scene.constraints)
    if constraints:
        sections.append("Constraints:\n" + constraints)
    return "\n\n".join(sections) + "\n"


# ---------------------------------------------------------------------------
# Validation

def validate_scene(scene: SceneConfig) -> list[str]:
    """Return a list of invariant violations; empty iff the scene is valid."""
    problems: list[str] = []
    seen: set[str] = set()
    for o in scene.objects:
        if o.name in seen:
            problems.append(f"duplicate object name {o.name!r}")
        seen.add(o.name)
        if not all(v > 0 for v in o.size.as_list()):
            problems.append(f"object {o.name!r}: size components must be > 0")
        if o.mass < 0:
            problems.append(f"object {o.name!r}: mass must be >= 0")
        if not (-math.pi <= o.yaw < math.pi):
            problems.append(f"object {o.name!r}: yaw must lie in [-pi, pi)")
        if not (o.position.is_finite() and o.size.is_finite() and o.graspable_offset.is_finite()):
            problems.append(f"object {o.name!r}: non-finite component")

    objs = [o for o in scene.objects if all(v > 0 for v in o.size.as_list())]
    for i, a in enumerate(objs):
        for b in objs[i + 1:]:
            if a.name == b.name:
                continue
            depth = geo.overlap_depths(a.box(), b.box())
            if np.all(depth > 1e-3):
                problems.append(f"objects {a.name!r} and {b.name!r} interpenetrate")

    r = scene.robot
    legal = LEGAL_SKILLS.get(r.embodiment)
    if legal is None:
        problems.append(f"robot: unknown embodiment {r.embodiment!r}")
    else:
        extra = [s for s in r.skills if s not in legal]
        if extra:
            problems.append(f"robot: skills {extra} not legal for {r.embodiment}")
        if r.embodiment == "arm":
            needed = ("workspace_center", "workspace_radius")
        else:
            needed = ("gap_limit", "climb_step_limit", "push_mass_limit")
        for k in needed:
            v = getattr(r, k)
            if v is None:
                problems.append(f"robot: {k} is required for {r.embodiment}")
            elif isinstance(v, float) and not v > 0:
                problems.append(f"robot: {k} must be > 0")
        if r.axis_order not in AXIS_ORDERS:
            problems.append(f"robot: unknown axis_order {r.axis_order!r}")
    if not r.half_width > 0:
        problems.append("robot: half_width must be > 0")
    if not geo.rect_contains(scene.floor_extent, r.base_position.x, r.base_position.y):
        problems.append("robot: base outside floor_extent")

    for c in scene.constraints:
        if c.kind not in ("environment", "robot"):
            problems.append(f"constraint {c.id!r}: kind must be environment or robot")
        if not c.text.strip():
            problems.append(f"constraint {c.id!r}: empty text")
        name, args = parse_predicate(c.predicate)
        if name not in PREDICATES:
            problems.append(f"constraint {c.id!r}: unknown predicate {name!r}")
        elif len(args) != PREDICATES[name][1]:
            problems.append(f"constraint {c.id!r}: predicate {name!r} takes {PREDICATES[name][1]} argument(s)")
        elif name != "robot_limit":
            missing = [a for a in args if a not in seen]
            if missing:
                problems.append(f"constraint {c.id!r}: unknown object(s) {missing}")

    for m in scene.mechanisms:
        if m.kind not in MECHANISM_KINDS:
            problems.append(f"mechanism {m.id!r}: unknown kind {m.kind!r}")
        missing = [v for v in m.participants.values() if v not in seen]
        if missing:
            problems.append(f"mechanism {m.id!r}: unknown participant(s) {missing}")

    for g in scene.rigid_groups:
        missing = [n for n in g if n not in seen]
        if missing:
            problems.append(f"rigid group {list(g)}: unknown object(s) {missing}")
    return problems

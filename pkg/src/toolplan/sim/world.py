"""Deterministic 2.5D kinematic world for both embodiments.

Objects are boxes with a planar pose (position, yaw) and a height.  Rigid
groups move together; a group is "held" when the gripper closes on one of its
members.  Skills mutate the world atomically: a skill that raises leaves the
state untouched.
"""

from __future__ import annotations

import copy
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .. import geometry as geo
from ..planscript.values import SkillCallError
from ..scene import SceneConfig, TaskSpec
from .config import SimConfig
from .rrt import FreeSpace, PathNotFound, plan_path

SKILL_ERROR_KINDS = (
    "out_of_workspace",
    "gap_too_wide",
    "step_too_high",
    "over_mass_limit",
    "path_not_found",
    "nothing_to_grasp",
    "invalid_target",
    "unknown_object",
)
# error kinds that correspond to a violated robot limit
CONSTRAINT_ERROR_KINDS = frozenset({"out_of_workspace", "gap_too_wide", "step_too_high", "over_mass_limit"})

SUCCESS_CHECKS = {
    "milk-reaching": "holding:milk",
    "can-grasping": "holding:can",
    "button-pressing": "flag:button_pressed",
    "sofa-traversing": "support:sofa_b",
    "sofa-climbing": "support:sofa",
    "cube-lifting": "flag:cube_lifted",
}


class SkillError(SkillCallError):
    def __init__(self, kind: str, detail: str, **values):
        if kind not in SKILL_ERROR_KINDS:
            raise ValueError(f"unknown skill error kind {kind!r}")
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail
        self._values = values

    def values(self) -> dict:
        return dict(self._values)


def _vec_list(v) -> list[float]:
    return [float(c) for c in v]


@dataclass
class Body:
    position: np.ndarray
    yaw: float
    size: np.ndarray

    def box(self):
        return geo.box_of(self.position, self.size, self.yaw)


class World:
    """Mutable world state plus the skill implementations."""

    def __init__(self, scene: SceneConfig, config: SimConfig | None = None, seed: int | None = None):
        self.scene = scene
        self.config = config or SimConfig()
        self.seed = self.config.seed if seed is None else int(seed)
        self.specs = {o.name: o for o in scene.objects}
        self.bodies = {
            o.name: Body(o.position.as_array(), float(o.yaw), o.size.as_array()) for o in scene.objects
        }
        self.group_of: dict[str, int] = {n: i for i, n in enumerate(self.bodies)}
        for g in scene.rigid_groups:
            self._merge(list(g))
        self.merged: set[int] = set()  # groups formed by magnets
        r = scene.robot
        self.robot_pos = r.base_position.as_array()
        self.robot_yaw = float(r.base_yaw)
        self.support = self._support_at(self.robot_pos) if r.embodiment == "quadruped" else None
        home = r.home_position or r.base_position
        self.ee = home.as_array() if r.embodiment == "arm" else None
        self.gripper = "open"
        self.held: str | None = None
        self.flags = {"cube_lifted": False, "button_pressed": False, "gap_spanned_by": None}
        self.spanned: set[frozenset] = set()
        self.step = 0
        self.plan_count = 0
        self.last_detail: dict | None = None

    # ------------------------------------------------------------------ groups

    def _merge(self, names: list[str]) -> int:
        target = self.group_of[names[0]]
        for n in names[1:]:
            old = self.group_of[n]
            for m, g in self.group_of.items():
                if g == old:
                    self.group_of[m] = target
        return target

    def group(self, name: str) -> list[str]:
        gid = self.group_of[name]
        return [n for n in self.bodies if self.group_of[n] == gid]

    def groups(self) -> list[list[str]]:
        seen, out = set(), []
        for n in self.bodies:
            gid = self.group_of[n]
            if gid not in seen:
                seen.add(gid)
                out.append(self.group(n))
        return out

    def held_group(self) -> list[str]:
        return self.group(self.held) if self.held else []

    def group_box(self, names):
        return geo.union(self.bodies[n].box() for n in names)

    def _fixed(self, names) -> bool:
        return any("fixed" in self.specs[n].tags for n in names)

    # ------------------------------------------------------------------ queries

    def _require(self, name: str) -> None:
        if name not in self.bodies:
            raise SkillError("unknown_object", f"no object named {name!r}", name=name)

    def get_position(self, name: str) -> np.ndarray:
        self._require(name)
        return self.bodies[name].position.copy()

    def get_size(self, name: str) -> np.ndarray:
        """World-frame extents; magnet-merged objects report the composite box."""
        self._require(name)
        if self.group_of[name] in self.merged:
            lo, hi = self.group_box(self.group(name))
            return hi - lo
        return geo.world_extents(self.bodies[name].size, self.bodies[name].yaw)

    def oracle(self) -> "PerceptionOracle":
        return PerceptionOracle({
            n: (b.position.copy(), b.yaw, geo.world_extents(b.size, b.yaw)) for n, b in self.bodies.items()
        })

    # ------------------------------------------------------------------ snapshot

    def snapshot(self) -> dict:
        snap = {
            "step": self.step,
            "objects": {
                n: {"position": _vec_list(b.position), "yaw": float(b.yaw)} for n, b in self.bodies.items()
            },
            "groups": [g for g in self.groups() if len(g) > 1],
            "flags": dict(self.flags),
            "spanned": sorted(sorted(p) for p in self.spanned),
        }
        if self.scene.robot.embodiment == "arm":
            snap["arm"] = {"ee": _vec_list(self.ee), "gripper": self.gripper, "held": self.held}
        else:
            snap["robot"] = {"position": _vec_list(self.robot_pos), "yaw": self.robot_yaw,
                             "support": self.support}
        return snap

    def _save(self):
        return copy.deepcopy({k: v for k, v in self.__dict__.items() if k not in ("scene", "config", "specs")})

    def _restore(self, saved) -> None:
        self.__dict__.update(saved)

    def _mutating(self, fn, *args):
        saved = self._save()
        try:
            detail = fn(*args)
        except Exception:
            self._restore(saved)
            raise
        self.step += 1
        self.apply_mechanisms()
        self.last_detail = detail
        return None

    # ------------------------------------------------------------------ support

    def _supports(self) -> list[tuple[str, tuple]]:
        """Standable surfaces as (name, footprint) pairs, floor first."""
        out = [(self.scene.floor_name, tuple(self.scene.floor_extent))]
        for n, spec in self.specs.items():
            if spec.is_support_surface:
                out.append((n, geo.footprint(self.bodies[n].box())))
        return out

    def surface_top(self, name: str) -> float:
        if name == self.scene.floor_name:
            return 0.0
        return float(self.bodies[name].box()[1][2])

    def _support_at(self, p) -> str | None:
        """Highest standable surface under ``p`` whose top matches ``p.z``."""
        best, best_top = None, -math.inf
        for n, fp in self._supports():
            top = self.surface_top(n)
            if abs(top - p[2]) <= self.config.walk_height_tolerance and geo.rect_contains(fp, p[0], p[1]):
                if top > best_top:
                    best, best_top = n, top
        return best

    def height_at(self, x: float, y: float) -> tuple[str, float]:
        best, best_top = self.scene.floor_name, 0.0
        for n, fp in self._supports()[1:]:
            top = self.surface_top(n)
            if geo.rect_contains(fp, x, y, tol=0.0) and top > best_top:
                best, best_top = n, top
        return best, best_top

    def settle(self) -> None:
        """Drop every free group onto the highest surface beneath it."""
        held = set(self.held_group())
        free = [g for g in self.groups() if not held.intersection(g) and not self._fixed(g)]
        free.sort(key=lambda g: float(self.group_box(g)[0][2]))
        tol = self.config.ride_tolerance
        for g in free:
            lo, hi = self.group_box(g)
            bottom = float(lo[2])
            new = 0.0
            for n, b in self.bodies.items():
                if n in g:
                    continue
                blo, bhi = b.box()
                if bhi[2] <= bottom + tol and geo.xy_overlap((lo, hi), (blo, bhi), tol=1e-6):
                    new = max(new, float(bhi[2]))
            dz = new - bottom
            if abs(dz) > 1e-12:
                for n in g:
                    self.bodies[n].position = self.bodies[n].position + np.array([0.0, 0.0, dz])

    def _riders(self, movers: set[str]) -> set[str]:
        """Objects resting on ``movers`` whose center lies over them, transitively."""
        tol = self.config.ride_tolerance
        riders: set[str] = set()
        frontier = set(movers)
        while frontier:
            new = set()
            for m in frontier:
                mlo, mhi = self.bodies[m].box()
                fp = geo.footprint((mlo, mhi))
                for n, b in self.bodies.items():
                    if n in movers or n in riders or n in new:
                        continue
                    blo, _ = b.box()
                    if abs(blo[2] - mhi[2]) <= tol and geo.rect_contains(fp, b.position[0], b.position[1], 0.0):
                        new.update(self.group(n))
            new -= movers | riders
            riders |= new
            frontier = new
        return riders

    def _translate(self, names, d) -> None:
        for n in names:
            self.bodies[n].position = self.bodies[n].position + d

    # ------------------------------------------------------------------ arm skills

    def _gripper_box(self, ee=None):
        h = self.config.gripper_half_size
        p = self.ee if ee is None else ee
        return p - h, p + h

    def _check_arm(self) -> None:
        if self.scene.robot.embodiment != "arm":
            raise SkillError("invalid_target", "this robot has no arm")

    def move_to_position(self, target) -> None:
        self._check_arm()
        target = np.asarray(target, dtype=float)
        if target.shape != (3,) or not np.all(np.isfinite(target)):
            raise SkillError("invalid_target", "target must be a finite 3-vector", target=_vec_list(np.ravel(target)))
        r = self.scene.robot
        dist = float(np.linalg.norm(target - r.workspace_center.as_array()))
        if dist > r.workspace_radius:
            raise SkillError("out_of_workspace", f"target is {dist:.3f} m from the workspace center",
                             target=_vec_list(target), distance=dist, radius=r.workspace_radius)
        held = self.held_group()
        if held and abs(target[2] - self.ee[2]) > 1e-9:
            stuck = [n for n in held if "cannot_lift" in self.specs[n].tags]
            if stuck:
                raise SkillError("invalid_target", f"{stuck[0]} cannot be lifted", target=_vec_list(target),
                                 object=stuck[0])
        self._mutating(self._do_move, target)

    def _legs(self, target):
        order = self.scene.robot.axis_order
        if order == "straight":
            return [target.copy()]
        legs, p = [], self.ee.copy()
        for axis in order:
            i = "xyz".index(axis)
            if abs(p[i] - target[i]) > 0:
                p = p.copy()
                p[i] = target[i]
                legs.append(p)
        return legs

    def _do_move(self, target):
        cfg = self.config
        held = set(self.held_group())
        start_movers = [self._gripper_box()] + [self.bodies[n].box() for n in held]
        exempt = {n for n in self.bodies if n not in held
                  and any(geo.penetrates(m, self.bodies[n].box(), cfg.contact_z_tolerance) for m in start_movers)}
        pushed: set[str] = set()
        blocked_by = None
        legs = self._legs(target)
        for leg in legs:
            delta = leg - self.ee
            n_steps = max(1, int(math.ceil(float(np.linalg.norm(delta)) / cfg.sweep_step)))
            d = delta / n_steps
            for k in range(n_steps):
                step_to = leg if k == n_steps - 1 else self.ee + d
                blocked_by = self._sweep_step(step_to - self.ee, held, exempt, pushed)
                if blocked_by:
                    break
            if blocked_by:
                break
        self.settle()
        detail = {"legs": [_vec_list(p) for p in legs], "pushed": sorted(pushed), "ee": _vec_list(self.ee)}
        if blocked_by:
            detail["blocked_by"] = blocked_by
        return detail

    def _sweep_step(self, d, held: set[str], exempt: set[str], pushed: set[str]) -> str | None:
        """Advance the gripper by ``d``; returns a blocking object name if the step is refused."""
        ztol = self.config.contact_z_tolerance
        dh = np.array([d[0], d[1], 0.0])
        riders = self._riders(held) if held else set()
        new_ee = self.ee + d
        movers = [self._gripper_box(new_ee)] + [(lo + d, hi + d) for lo, hi in
                                                 (self.bodies[n].box() for n in held)]
        moving = set(held) | riders
        chain: set[str] = set()
        if np.any(dh != 0):
            queue = deque(movers)
            while queue:
                m = queue.popleft()
                for n, b in self.bodies.items():
                    if n in moving or n in chain or n in exempt:
                        continue
                    if geo.penetrates(m, b.box(), ztol):
                        grp = self.group(n)
                        if self._fixed(grp):
                            return n
                        chain.update(grp)
                        for g in grp:
                            lo, hi = self.bodies[g].box()
                            queue.append((lo + dh, hi + dh))
            if chain:
                chain |= self._riders(chain) - moving
        else:
            for m in movers:
                for n, b in self.bodies.items():
                    if n not in moving and n not in exempt and self._fixed([n]) and geo.penetrates(m, b.box(), ztol):
                        return n
        self.ee = new_ee
        self._translate(held | riders - chain, d)
        self._translate(chain, dh)
        pushed.update(chain)
        return None

    def close_gripper(self) -> None:
        self._check_arm()
        self._mutating(self._do_close)

    def _do_close(self):
        self.gripper = "closed"
        if self.held:
            return {"grasped": self.held}
        best, best_d = None, math.inf
        for n, spec in self.specs.items():
            if "fixed" in spec.tags:
                continue
            gp = self.bodies[n].position + spec.graspable_offset.as_array()
            dist = float(np.linalg.norm(gp - self.ee))
            if dist <= self.config.grasp_radius and dist < best_d:
                best, best_d = n, dist
        self.held = best
        return {"grasped": best}

    def open_gripper(self) -> None:
        self._check_arm()
        self._mutating(self._do_open)

    def _do_open(self):
        released = self.held
        self.gripper = "open"
        self.held = None
        self.settle()
        return {"released": released}

    # ------------------------------------------------------------------ quadruped skills

    def _check_legs(self) -> None:
        if self.scene.robot.embodiment != "quadruped":
            raise SkillError("invalid_target", "this robot has no legs")

    def _finite_target(self, target) -> np.ndarray:
        target = np.asarray(target, dtype=float)
        if target.shape != (3,) or not np.all(np.isfinite(target)):
            raise SkillError("invalid_target", "target must be a finite 3-vector", target=_vec_list(np.ravel(target)))
        return target

    def _next_seed(self) -> int:
        s = self.seed * 1000003 + self.plan_count
        self.plan_count += 1
        return s

    def _can_cross(self, a: str, b: str) -> tuple[bool, float]:
        fa, fb = self._footprint_of(a), self._footprint_of(b)
        gap = _rect_gap(fa, fb)
        same_height = abs(self.surface_top(a) - self.surface_top(b)) <= self.config.walk_height_tolerance
        bridged = frozenset((a, b)) in self.spanned
        ok = same_height and (gap <= self.scene.robot.gap_limit + 1e-12 or bridged)
        return ok, gap

    def _footprint_of(self, name: str):
        if name == self.scene.floor_name:
            return tuple(self.scene.floor_extent)
        return geo.footprint(self.bodies[name].box())

    def _route(self, start: str, goal: str) -> list[str] | None:
        names = [n for n, _ in self._supports()]
        prev = {start: None}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            if cur == goal:
                path = [cur]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            for n in names:
                if n not in prev and self._can_cross(cur, n)[0]:
                    prev[n] = cur
                    queue.append(n)
        return None

    def _blocking_gap(self, start: str) -> tuple[float, str, str] | None:
        """Narrowest untraversable same-height gap leaving the reachable set."""
        names = [n for n, _ in self._supports()]
        reach = {n for n in names if n == start or self._route(start, n) is not None}
        best = None
        for a in reach:
            for b in names:
                if b in reach:
                    continue
                if abs(self.surface_top(a) - self.surface_top(b)) > self.config.walk_height_tolerance:
                    continue
                gap = _rect_gap(self._footprint_of(a), self._footprint_of(b))
                if best is None or gap < best[0]:
                    best = (gap, a, b)
        return best

    def _free_space(self, route: list[str], extra_obstacles=(), exclude=()) -> FreeSpace:
        regions = [self._footprint_of(n) for n in route]
        for a, b in zip(route, route[1:]):
            pair = frozenset((a, b))
            if pair in self.spanned:
                regions.append(geo.footprint(self.bodies[self._spanner(pair)].box()))
            else:
                regions.append(_connector(self._footprint_of(a), self._footprint_of(b)))
        h = self.surface_top(route[0])
        obstacles = []
        skip = set(route) | set(exclude)
        for n, b in self.bodies.items():
            if n in skip:
                continue
            lo, hi = b.box()
            if hi[2] > h + self.config.walk_over_height or n in extra_obstacles:
                obstacles.append(geo.footprint((lo, hi)))
        return FreeSpace(regions, obstacles, clearance=self.scene.robot.half_width)

    def _spanner(self, pair) -> str:
        for m in self.scene.mechanisms:
            if m.kind == "bridge" and frozenset((m.participants["side_a"], m.participants["side_b"])) == pair:
                return m.participants["spanner"]
        raise KeyError(pair)

    def _plan(self, space: FreeSpace, start, goal):
        seed = self._next_seed()
        try:
            return plan_path(start[:2], goal[:2], seed=seed, space=space, config=self.config)
        except PathNotFound as exc:
            raise SkillError("path_not_found", str(exc), start=_vec_list(start[:2]), goal=_vec_list(goal[:2]),
                             seed=seed) from None

    def walk_to_position(self, target) -> None:
        self._check_legs()
        target = self._finite_target(target)
        goal_surface = self._support_at(target)
        if goal_surface is None:
            raise SkillError("invalid_target", "no standable surface at the target", target=_vec_list(target))
        route = self._route(self.support, goal_surface)
        if route is None:
            blocking = self._blocking_gap(self.support)
            if blocking is not None and blocking[0] > self.scene.robot.gap_limit:
                gap, a, b = blocking
                raise SkillError("gap_too_wide", f"gap of {gap:.3f} m between {a} and {b}",
                                 gap=gap, limit=self.scene.robot.gap_limit, between=[a, b])
            raise SkillError("path_not_found", f"{goal_surface} is not reachable from {self.support}",
                             start=_vec_list(self.robot_pos[:2]), goal=_vec_list(target[:2]))
        self._mutating(self._do_walk, target, route)

    def _do_walk(self, target, route):
        space = self._free_space(route)
        plan = self._plan(space, self.robot_pos, target)
        self.robot_pos = np.array([target[0], target[1], self.surface_top(route[-1])])
        self.support = route[-1]
        return {"route": route, "path": plan.to_dict()}

    def climb_to_position(self, target) -> None:
        self._check_legs()
        target = self._finite_target(target)
        goal_surface = self._support_at(target)
        if goal_surface is None:
            raise SkillError("invalid_target", "no standable surface at the target", target=_vec_list(target))
        a, b = self.robot_pos[:2], target[:2]
        n = max(2, int(math.ceil(float(np.linalg.norm(b - a)) / self.config.collision_resolution)) + 1)
        prev_h = self.surface_top(self.support)
        limit = self.scene.robot.climb_step_limit
        profile = []
        for t in np.linspace(0.0, 1.0, n)[1:]:
            p = a + t * (b - a)
            name, h = self.height_at(p[0], p[1])
            if t == 1.0:
                name, h = goal_surface, self.surface_top(goal_surface)
            if not profile or profile[-1][0] != name:
                profile.append((name, h))
            rise = h - prev_h
            if rise > limit + 1e-12:
                raise SkillError("step_too_high", f"rise of {rise:.3f} m onto {name}",
                                 rise=rise, limit=limit, at=_vec_list(p), surface=name)
            prev_h = h
        self._mutating(self._do_climb, target, goal_surface, profile)

    def _do_climb(self, target, goal_surface, profile):
        self.robot_pos = np.array([target[0], target[1], self.surface_top(goal_surface)])
        self.support = goal_surface
        return {"surfaces": [p[0] for p in profile]}

    def push_to_position(self, name: str, target, yaw: float | None = None) -> None:
        self._check_legs()
        self._require(name)
        target = self._finite_target(target)
        if yaw is not None and not math.isfinite(yaw):
            raise SkillError("invalid_target", "yaw must be finite", target=_vec_list(target))
        grp = self.group(name)
        mass = sum(self.specs[n].mass for n in grp)
        limit = self.scene.robot.push_mass_limit
        if mass > limit:
            raise SkillError("over_mass_limit", f"{name} weighs {mass:.2f} kg", object=name, mass=mass, limit=limit)
        if self._fixed(grp):
            raise SkillError("invalid_target", f"{name} is fixed in place", object=name)
        lo, _ = self.group_box(grp)
        if abs(float(lo[2]) - self.robot_pos[2]) > self.config.walk_height_tolerance:
            raise SkillError("invalid_target", f"{name} does not rest on the robot's surface", object=name)
        self._mutating(self._do_push, name, target, yaw)

    def _do_push(self, name, target, yaw):
        grp = self.group(name)
        body = self.bodies[name]
        goal_yaw = body.yaw if yaw is None else geo.wrap_angle(float(yaw))
        region = self._footprint_of(self.support)
        phases = []
        for phase in ("rotate", "push_y", "push_x"):
            riders = self._riders(set(grp))
            cur = body.position
            if phase == "rotate":
                delta = geo.wrap_angle(goal_yaw - body.yaw)
                skipped = abs(delta) <= 1e-12
            elif phase == "push_y":
                delta = float(target[1] - cur[1])
                skipped = abs(delta) <= 1e-12
            else:
                delta = float(target[0] - cur[0])
                skipped = abs(delta) <= 1e-12
            rec = {"phase": phase, "skipped": skipped}
            if not skipped:
                stand, offset = self._push_pose(grp, phase, delta)
                space = self._free_space([self.support], extra_obstacles=set(grp), exclude=riders)
                if not space.point_free(stand[:2]):
                    raise SkillError("path_not_found", f"no free standing pose to {phase} {name}",
                                     object=name, phase=phase, stand=_vec_list(stand[:2]))
                plan = self._plan(space, self.robot_pos, stand)
                if phase == "rotate":
                    self._rotate_group(set(grp) | riders, name, delta)
                    # step back so the rotated footprint stays clear of the robot
                    end, _ = self._push_pose(grp, phase, delta)
                else:
                    axis = 1 if phase == "push_y" else 0
                    d = np.zeros(3)
                    d[axis] = delta
                    self._translate(set(grp) | riders, d)
                    end = stand + d
                if not geo.rect_contains(region, end[0], end[1]):
                    raise SkillError("invalid_target", "the push would carry the robot off its surface",
                                     object=name, phase=phase)
                self.robot_pos = np.array([end[0], end[1], self.robot_pos[2]])
                rec.update({"stand": _vec_list(stand[:2]), "path": plan.to_dict(),
                            "pose": _vec_list(body.position) + [body.yaw]})
            phases.append(rec)
        self.settle()
        moved = set(grp)
        for n, b in self.bodies.items():
            if n in moved:
                continue
            for m in moved:
                if geo.penetrates(self.bodies[m].box(), b.box(), 1e-3, 1e-3):
                    raise SkillError("invalid_target", f"{name} would collide with {n}", object=name, other=n)
        err = float(np.linalg.norm(body.position[:2] - target[:2]))
        yerr = abs(geo.wrap_angle(body.yaw - goal_yaw))
        return {"object": name, "phases": phases, "position_error": err, "yaw_error": yerr}

    def _push_pose(self, grp, phase: str, delta: float):
        lo, hi = self.group_box(grp)
        center = (lo + hi) / 2.0
        half = (hi - lo) / 2.0
        clear = self.scene.robot.half_width + self.config.push_margin
        stand = np.array([center[0], center[1], self.robot_pos[2]])
        if phase == "push_y":
            stand[1] -= math.copysign(half[1] + clear, delta)
        else:
            # rotation is applied from the -x face; x pushes from the trailing face
            sign = 1.0 if phase == "rotate" else math.copysign(1.0, delta)
            stand[0] -= sign * (half[0] + clear)
        return stand, stand - center

    def _rotate_group(self, names, pivot: str, delta: float) -> None:
        c = self.bodies[pivot].position
        cs, sn = math.cos(delta), math.sin(delta)
        for n in names:
            b = self.bodies[n]
            rel = b.position - c
            b.position = c + np.array([cs * rel[0] - sn * rel[1], sn * rel[0] + cs * rel[1], rel[2]])
            b.yaw = geo.wrap_angle(b.yaw + delta)

    # ------------------------------------------------------------------ mechanisms

    def apply_mechanisms(self) -> None:
        """Evaluate every mechanism rule; effects are idempotent and flags never unset."""
        for m in self.scene.mechanisms:
            getattr(self, f"_mech_{m.kind}")(m)

    def _mech_lever(self, m) -> None:
        p = m.participants
        lever = self.bodies[p["lever"]]
        lo, hi = lever.box()
        frac = float(m.trigger.get("end_fraction", 1.0 / 3.0))
        end = m.trigger.get("effort_end", "+x")
        axis = 0 if end[1] == "x" else 1
        span = hi[axis] - lo[axis]
        end_lo, end_hi = lo.copy(), hi.copy()
        if end[0] == "+":
            end_lo[axis] = hi[axis] - frac * span
        else:
            end_hi[axis] = lo[axis] + frac * span
        end_box = (end_lo, end_hi)
        support_clear = not geo.xy_overlap(end_box, self.bodies[p["support"]].box(), tol=1e-6)
        robot_on = (self.support == p["lever"]
                    and geo.rect_contains(geo.footprint(end_box), self.robot_pos[0], self.robot_pos[1]))
        if support_clear and robot_on:
            self.flags["cube_lifted"] = True

    def _mech_magnetic_attach(self, m) -> None:
        a, b = m.participants["a"], m.participants["b"]
        if self.group_of[a] == self.group_of[b]:
            return
        max_gap = float(m.trigger.get("max_gap", 0.01))
        max_angle = math.radians(float(m.trigger.get("max_angle_deg", 10.0)))
        ya, yb = self.bodies[a].yaw, self.bodies[b].yaw
        dyaw = abs(geo.wrap_angle(2.0 * (ya - yb))) / 2.0  # modulo pi
        if dyaw > max_angle:
            return
        d = geo.overlap_depths(self.bodies[a].box(), self.bodies[b].box())
        if d[2] <= 0:
            return
        for axis, other in ((0, 1), (1, 0)):
            if -max_gap <= d[axis] <= 1e-3 and d[other] > 1e-6:
                self.merged.add(self._merge([a, b]))
                held_members = [n for n in self.group(a) if n == self.held]
                if held_members:
                    self.held = held_members[0]
                return

    def _mech_bridge(self, m) -> None:
        p = m.participants
        pair = frozenset((p["side_a"], p["side_b"]))
        if pair in self.spanned:
            return
        need = float(m.trigger.get("min_overlap", 0.05))
        sp = self.bodies[p["spanner"]].box()
        for side in (p["side_a"], p["side_b"]):
            d = geo.overlap_depths(sp, self.bodies[side].box())
            if not (d[0] >= need - 1e-9 and d[1] >= need - 1e-9):
                return
        self.spanned.add(pair)
        if self.flags["gap_spanned_by"] is None:
            self.flags["gap_spanned_by"] = p["spanner"]

    def _mech_button(self, m) -> None:
        button = self.bodies[m.participants["button"]].box()
        reach = float(m.trigger.get("distance", 0.01))
        if self.ee is None:
            return
        boxes = [self._gripper_box()] + [self.bodies[n].box() for n in self.held_group()]
        if any(geo.box_distance(bx, button) <= reach + 1e-9 for bx in boxes):
            self.flags["button_pressed"] = True

    # ------------------------------------------------------------------ dispatch

    def call(self, skill: str, *args):
        fn = getattr(self, skill, None)
        if skill not in SKILL_METHODS or fn is None:
            raise SkillError("invalid_target", f"unknown skill {skill!r}")
        self.last_detail = None
        return fn(*args)


SKILL_METHODS = frozenset({
    "get_position", "get_size", "open_gripper", "close_gripper", "move_to_position",
    "walk_to_position", "climb_to_position", "push_to_position",
})


def _rect_gap(a, b) -> float:
    dx = max(0.0, max(a[0] - b[2], b[0] - a[2]))
    dy = max(0.0, max(a[1] - b[3], b[1] - a[3]))
    return math.hypot(dx, dy)


def _connector(a, b):
    """Rectangle joining two footprints across the gap between them."""
    x0, x1 = max(a[0], b[0]), min(a[2], b[2])
    y0, y1 = max(a[1], b[1]), min(a[3], b[3])
    if x0 > x1:
        x0, x1 = min(a[2], b[2]), max(a[0], b[0])
    if y0 > y1:
        y0, y1 = min(a[3], b[3]), max(a[1], b[1])
    return (x0, y0, x1, y1)


@dataclass
class PerceptionOracle:
    """Ground-truth perception: name -> (position, yaw, world extents)."""

    entries: dict

    def position(self, name: str) -> np.ndarray:
        return self.entries[name][0]

    def size(self, name: str) -> np.ndarray:
        return self.entries[name][2]


def check_success(check: str, state: dict) -> bool:
    kind, _, arg = check.partition(":")
    if kind == "holding":
        arm = state.get("arm") or {}
        if arm.get("gripper") != "closed" or arm.get("held") is None:
            return False
        held = arm["held"]
        members = {held}
        for g in state.get("groups", []):
            if held in g:
                members.update(g)
        return arg in members
    if kind == "flag":
        return bool(state["flags"].get(arg))
    if kind == "support":
        return (state.get("robot") or {}).get("support") == arg
    raise ValueError(f"unknown success check {check!r}")


def is_success(task_id: str, state: dict) -> bool:
    if task_id not in SUCCESS_CHECKS:
        raise ValueError(f"unknown task id {task_id!r}")
    return check_success(SUCCESS_CHECKS[task_id], state)


def task_success(task: TaskSpec, state: dict) -> bool:
    return check_success(task.success_check, state)

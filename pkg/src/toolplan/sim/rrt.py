"""Informed RRT* over a planar free space made of rectangles.

Free space is the union of ``regions`` minus ``obstacles`` inflated by the
robot clearance.  Edges are validated by sampling at a fixed resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig


class PathNotFound(Exception):
    pass


@dataclass
class PathPlan:
    waypoints: list[tuple[float, float]]
    cost: float
    iterations: int
    seed: int
    nodes: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        return {"waypoints": [list(w) for w in self.waypoints], "cost": self.cost,
                "iterations": self.iterations, "seed": self.seed}


class FreeSpace:
    def __init__(self, regions, obstacles=(), clearance: float = 0.0):
        self.regions = np.asarray(list(regions), dtype=float).reshape(-1, 4)
        obs = np.asarray(list(obstacles), dtype=float).reshape(-1, 4)
        if len(obs):
            obs = obs + np.array([-clearance, -clearance, clearance, clearance])
        self.obstacles = obs
        self.clearance = clearance
        self._region_list = [tuple(map(float, r)) for r in self.regions]
        self._obstacle_list = [tuple(map(float, o)) for o in obs]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        r = self.regions
        return float(r[:, 0].min()), float(r[:, 1].min()), float(r[:, 2].max()), float(r[:, 3].max())

    def points_free(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        p = pts.reshape(-1, 2)
        x, y = p[:, 0:1], p[:, 1:2]
        r = self.regions
        inside = ((x >= r[:, 0] - 1e-9) & (x <= r[:, 2] + 1e-9)
                  & (y >= r[:, 1] - 1e-9) & (y <= r[:, 3] + 1e-9)).any(axis=1)
        if len(self.obstacles):
            o = self.obstacles
            hit = ((x > o[:, 0]) & (x < o[:, 2]) & (y > o[:, 1]) & (y < o[:, 3])).any(axis=1)
            inside &= ~hit
        return inside.reshape(shape)

    def point_free(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        for r0, r1, r2, r3 in self._region_list:
            if r0 - 1e-9 <= x <= r2 + 1e-9 and r1 - 1e-9 <= y <= r3 + 1e-9:
                break
        else:
            return False
        for o0, o1, o2, o3 in self._obstacle_list:
            if o0 < x < o2 and o1 < y < o3:
                return False
        return True

    def segments_free(self, a, bs: np.ndarray, resolution: float) -> np.ndarray:
        """Check segments from ``a`` to each row of ``bs`` by sampling.

        Segments whose bounding box sits inside one region and clear of every
        obstacle are free without sampling; that shortcut never changes the
        sampled answer.
        """
        a = np.asarray(a, dtype=float)
        bs = np.asarray(bs, dtype=float).reshape(-1, 2)
        if len(bs) == 0:
            return np.zeros(0, dtype=bool)
        lo = np.minimum(bs, a)
        hi = np.maximum(bs, a)
        r = self.regions
        contained = ((lo[:, 0:1] >= r[:, 0]) & (lo[:, 1:2] >= r[:, 1])
                     & (hi[:, 0:1] <= r[:, 2]) & (hi[:, 1:2] <= r[:, 3])).any(axis=1)
        if len(self.obstacles):
            o = self.obstacles
            touches = ((lo[:, 0:1] < o[:, 2]) & (hi[:, 0:1] > o[:, 0])
                       & (lo[:, 1:2] < o[:, 3]) & (hi[:, 1:2] > o[:, 1])).any(axis=1)
            contained &= ~touches
        result = contained.copy()
        todo = np.nonzero(~contained)[0]
        if len(todo):
            sub = bs[todo]
            length = np.linalg.norm(sub - a, axis=1).max()
            n = max(2, int(math.ceil(length / resolution)) + 1)
            t = np.linspace(0.0, 1.0, n)[None, :, None]
            pts = a[None, None, :] + t * (sub[:, None, :] - a[None, None, :])
            result[todo] = self.points_free(pts).all(axis=1)
        return result

    def segment_free(self, a, b, resolution: float) -> bool:
        return bool(self.segments_free(a, np.asarray(b, dtype=float)[None, :], resolution)[0])


def _sample_informed(rng, start, goal, c_best, c_min):
    """Uniform sample from the ellipse with foci ``start``/``goal`` and major axis ``c_best``."""
    cx, cy = (start[0] + goal[0]) / 2.0, (start[1] + goal[1]) / 2.0
    theta = math.atan2(goal[1] - start[1], goal[0] - start[0])
    r1 = c_best / 2.0
    r2 = math.sqrt(max(c_best * c_best - c_min * c_min, 0.0)) / 2.0
    ang, u = rng.random(2)
    ang *= 2.0 * math.pi
    rad = math.sqrt(u)
    x, y = r1 * rad * math.cos(ang), r2 * rad * math.sin(ang)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([cx + c * x - s * y, cy + s * x + c * y])


def plan_path(start, goal, obstacles=(), seed: int = 0, *, regions=None, clearance: float = 0.0,
              config: SimConfig | None = None, space: FreeSpace | None = None) -> PathPlan:
    """Plan a collision-free 2D path with informed RRT*.

    Sampling is uniform (with a small goal bias) until a first solution is
    found, then restricted to the ellipse whose foci are ``start`` and
    ``goal`` and whose major axis equals the best cost so far.  The whole
    iteration budget is always spent.
    """
    cfg = config or SimConfig()
    start = np.asarray(start, dtype=float)[:2]
    goal = np.asarray(goal, dtype=float)[:2]
    if space is None:
        if regions is None:
            lo = np.minimum(start, goal) - 1.0
            hi = np.maximum(start, goal) + 1.0
            regions = [(lo[0], lo[1], hi[0], hi[1])]
        space = FreeSpace(regions, obstacles, clearance)
    if not space.point_free(start):
        raise PathNotFound("start is in collision")
    if not space.point_free(goal):
        raise PathNotFound("goal is in collision")

    rng = np.random.default_rng(seed)
    res = cfg.collision_resolution
    step = cfg.rrt_step
    radius = cfg.rrt_neighbor_radius
    connect = max(step, cfg.rrt_goal_tolerance)
    budget = int(cfg.rrt_budget)
    c_min = float(np.linalg.norm(goal - start))
    # uniform samples are drawn near the query rather than over the whole map
    margin = max(1.0, c_min)
    bx0, by0, bx1, by1 = space.bounds
    xmin = max(bx0, min(start[0], goal[0]) - margin)
    ymin = max(by0, min(start[1], goal[1]) - margin)
    xmax = min(bx1, max(start[0], goal[0]) + margin)
    ymax = min(by1, max(start[1], goal[1]) + margin)

    cap = budget + 1
    nodes = np.empty((cap, 2))
    cost = np.empty(cap)
    parent = np.full(cap, -1, dtype=int)
    children: list[list[int]] = [[]]
    nodes[0] = start
    cost[0] = 0.0
    n = 1
    goal_links: dict[int, float] = {}  # node -> edge length to goal

    def best():
        if not goal_links:
            return None, math.inf
        idx = min(goal_links, key=lambda i: (cost[i] + goal_links[i], i))
        return idx, cost[idx] + goal_links[idx]

    if c_min <= connect and space.segment_free(start, goal, res):
        goal_links[0] = c_min

    c_best = best()[1]
    dirty = False
    for _ in range(budget):
        if dirty:
            c_best = best()[1]
            dirty = False
        if math.isfinite(c_best):
            sample = _sample_informed(rng, start, goal, c_best, c_min)
        else:
            u = rng.random(3)
            if u[0] < cfg.rrt_goal_bias:
                sample = goal.copy()
            else:
                sample = np.array([xmin + u[1] * (xmax - xmin), ymin + u[2] * (ymax - ymin)])

        diff = nodes[:n] - sample
        d = np.sqrt(np.einsum('ij,ij->i', diff, diff))
        near_i = int(np.argmin(d))
        dist = d[near_i]
        if dist < 1e-12:
            continue
        new = nodes[near_i] + (sample - nodes[near_i]) * min(1.0, step / dist)
        if not space.point_free(new):
            continue

        diff = nodes[:n] - new
        dn = np.sqrt(np.einsum('ij,ij->i', diff, diff))
        near = np.nonzero(dn <= radius)[0]
        if near_i not in near:
            near = np.append(near, near_i)
        cand = cost[near] + dn[near]
        order = np.lexsort((near, cand))
        near, cand = near[order], cand[order]
        ok = space.segments_free(new, nodes[near], res)
        if not ok.any():
            continue
        k = int(np.argmax(ok))
        p = int(near[k])

        i = n
        nodes[i] = new
        cost[i] = cand[k]
        parent[i] = p
        children.append([])
        children[p].append(i)
        n += 1

        # rewire neighbours through the new node
        c_via = cost[i] + dn[near]
        better = ok & (c_via + 1e-12 < cost[near]) & (near != p)
        if goal_links and better.any():
            dirty = True
        for j, c_new in zip(near[better], c_via[better]):
            j = int(j)
            children[parent[j]].remove(j)
            parent[j] = i
            children[i].append(j)
            subtree = [j]
            for q in subtree:
                subtree.extend(children[q])
            cost[subtree] += c_new - cost[j]

        dg = math.hypot(goal[0] - new[0], goal[1] - new[1])
        if dg <= connect and space.segment_free(new, goal, res):
            goal_links[i] = dg
            dirty = True

    idx, c_best = best()
    if idx is None:
        raise PathNotFound(f"no path found within {budget} iterations")
    path = [tuple(goal.tolist())]
    if goal_links[idx] > 0.0:
        q = idx
        while q != -1:
            path.append(tuple(nodes[q].tolist()))
            q = parent[q]
    else:
        q = parent[idx]
        path.append(tuple(nodes[idx].tolist()))
        while q != -1:
            path.append(tuple(nodes[q].tolist()))
            q = parent[q]
    path.reverse()
    path[0] = tuple(start.tolist())
    return PathPlan(path, float(c_best), budget, seed, nodes=n)

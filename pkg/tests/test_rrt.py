from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toolplan.sim import SimConfig
from toolplan.sim.rrt import FreeSpace, PathNotFound, plan_path

FLOOR = [(-2.0, -2.0, 2.0, 2.0)]
FAST = SimConfig(rrt_budget=800)


def test_free_space_membership():
    space = FreeSpace([(0, 0, 1, 1), (1, 0, 2, 0.5)], [(0.4, 0.4, 0.6, 0.6)], clearance=0.1)
    assert space.point_free((0.1, 0.1))
    assert not space.point_free((0.35, 0.5))  # inside the inflated obstacle
    assert space.point_free((1.5, 0.25))
    assert not space.point_free((1.5, 0.75))
    assert space.bounds == (0.0, 0.0, 2.0, 1.0)
    pts = np.array([[0.1, 0.1], [0.5, 0.5], [3.0, 0.0]])
    assert space.points_free(pts).tolist() == [True, False, False]


def test_segment_checks():
    space = FreeSpace(FLOOR, [(-0.1, -1.0, 0.1, 1.0)])
    assert not space.segment_free((-1, 0), (1, 0), 0.01)
    assert space.segment_free((-1, 1.5), (1, 1.5), 0.01)
    assert space.segments_free((-1, 0), np.zeros((0, 2)), 0.01).shape == (0,)


@given(st.tuples(st.floats(-1.9, 1.9), st.floats(-1.9, 1.9)), st.tuples(st.floats(-1.9, 1.9), st.floats(-1.9, 1.9)))
@settings(max_examples=200)
def test_bbox_shortcut_agrees_with_sampling(a, b):
    space = FreeSpace(FLOOR, [(-0.3, -0.3, 0.2, 0.4)], clearance=0.05)
    a, b = np.array(a), np.array(b)
    fast = space.segment_free(a, b, 0.01)
    n = int(math.ceil(np.linalg.norm(b - a) / 0.01)) + 1
    pts = a + np.linspace(0, 1, max(n, 2))[:, None] * (b - a)
    assert fast == bool(space.points_free(pts).all())


def test_seeded_runs_are_identical():
    a = plan_path((-1.0, 0), (1.0, 0), [(-0.2, -0.5, 0.2, 0.5)], seed=11, regions=FLOOR, config=FAST)
    b = plan_path((-1.0, 0), (1.0, 0), [(-0.2, -0.5, 0.2, 0.5)], seed=11, regions=FLOOR, config=FAST)
    assert a == b
    assert a.iterations == 800 and a.seed == 11
    assert a.to_dict()["waypoints"][0] == [-1.0, 0.0]
    assert a.waypoints[-1] == (1.0, 0.0)


def test_path_is_collision_free_and_costs_add_up():
    obstacles = [(-0.2, -0.5, 0.2, 0.5)]
    plan = plan_path((-1.0, 0), (1.0, 0), obstacles, seed=3, regions=FLOOR, clearance=0.1, config=FAST)
    space = FreeSpace(FLOOR, obstacles, 0.1)
    w = np.array(plan.waypoints)
    assert all(space.segment_free(p, q, 0.005) for p, q in zip(w, w[1:]))
    assert math.isclose(plan.cost, float(np.linalg.norm(np.diff(w, axis=0), axis=1).sum()), rel_tol=1e-9)
    assert plan.cost > 2.0


def test_trivial_query():
    plan = plan_path((0, 0), (0.01, 0), seed=0, config=FAST)
    assert math.isclose(plan.cost, 0.01)


@pytest.mark.parametrize("start, goal, fragment", [
    ((0, 0), (1, 0), "start"),
    ((-1, 0), (0, 0), "goal"),
    ((-1, 0), (5, 0), "goal"),
])
def test_endpoints_in_collision(start, goal, fragment):
    with pytest.raises(PathNotFound, match=fragment):
        plan_path(start, goal, [(-0.2, -0.2, 0.2, 0.2)], regions=FLOOR, config=FAST)


def test_disconnected_regions():
    with pytest.raises(PathNotFound, match="800 iterations"):
        plan_path((0.5, 0.5), (2.5, 0.5), regions=[(0, 0, 1, 1), (2, 0, 3, 1)], config=FAST)

from __future__ import annotations

import copy
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toolplan.benchmark import TASK_KEYS, data_dir, load_benchmark_task
from toolplan.scene import (
    TASK_IDS,
    SceneFormatError,
    compose_query,
    constraint_active,
    load_task,
    render_constraint_description,
    save_task,
    scene_from_dict,
    scene_to_dict,
    task_from_dict,
    task_to_dict,
    validate_scene,
)


def raw(key: str) -> dict:
    return json.loads((data_dir() / "tasks" / f"{key.replace(':', '_')}.json").read_text())


@pytest.mark.parametrize("key", TASK_KEYS)
def test_shipped_tasks_are_valid(key):
    task = load_benchmark_task(key)
    assert validate_scene(task.scene) == []
    assert task.key == key


@pytest.mark.parametrize("key", TASK_KEYS)
def test_round_trip(key, tmp_path):
    task = load_benchmark_task(key)
    assert task_from_dict(task_to_dict(task)) == task
    save_task(task, tmp_path / "t.json")
    assert load_task(tmp_path / "t.json") == task


@pytest.mark.parametrize("key", TASK_IDS)
def test_default_scenes_activate_their_environment_constraint(key):
    scene = load_benchmark_task(key).scene
    env = [c for c in scene.constraints if c.kind == "environment"]
    assert env and all(constraint_active(c, scene) for c in env)


@pytest.mark.parametrize("key", ["sofa-traversing:small-gap", "sofa-climbing:low-sofa"])
def test_easy_variants_do_not_exceed_the_robot_limits(key):
    scene = load_benchmark_task(key).scene
    base = load_benchmark_task(key.split(":")[0]).scene
    gap = "gap_exceeds_limit:sofa_a,sofa_b" if "gap" in key else "height_exceeds_climb:sofa"
    from toolplan.scene import Constraint
    probe = Constraint("p", "environment", "probe", gap)
    assert constraint_active(probe, base)
    assert not constraint_active(probe, scene)


def test_query_layout():
    task = load_benchmark_task("sofa-traversing")
    q = compose_query(task)
    assert q.startswith("Task:\n" + task.instruction)
    assert q.index("Environment:") < q.index("Constraints:")
    assert "- surfboard: there is a surfboard on the sofa_a." in q
    assert "The robot is on the sofa_a" in q
    assert "0.30 m" in q


def test_constraints_render_environment_before_robot():
    scene = load_benchmark_task("can-grasping").scene
    lines = render_constraint_description(reversed(scene.constraints)).splitlines()
    kinds = [next(c.kind for c in scene.constraints if c.text in line) for line in lines]
    assert kinds == sorted(kinds)  # "environment" < "robot"


def test_unknown_fields_are_rejected():
    d = raw("milk-reaching")
    d["scene"]["objects"][0]["colour"] = "white"
    with pytest.raises(SceneFormatError, match="colour"):
        task_from_dict(d)


def test_missing_fields_are_rejected():
    d = raw("milk-reaching")
    del d["scene"]["robot"]["skills"]
    with pytest.raises(SceneFormatError, match="skills"):
        task_from_dict(d)


def test_bad_vectors_and_schema_version():
    d = raw("milk-reaching")
    d["scene"]["objects"][0]["size"] = [1, 2]
    with pytest.raises(SceneFormatError, match="3-vector"):
        task_from_dict(d)
    d = raw("milk-reaching")
    d["schema_version"] = 99
    with pytest.raises(SceneFormatError, match="schema_version"):
        task_from_dict(d)


def _mutated(**changes) -> list[str]:
    d = copy.deepcopy(raw("sofa-climbing")["scene"])
    for path, value in changes.items():
        target = d
        *head, last = path.split("__")
        for k in head:
            target = target[int(k)] if k.isdigit() else target[k]
        target[int(last) if last.isdigit() else last] = value
    return validate_scene(scene_from_dict(d))


@pytest.mark.parametrize("changes, fragment", [
    ({"objects__0__size": [0.8, 0.0, 0.6]}, "size components"),
    ({"objects__1__mass": -1.0}, "mass"),
    ({"objects__1__yaw": math.pi}, "yaw"),
    ({"objects__2__name": "sofa"}, "duplicate"),
    ({"objects__1__position": [2.0, 0.0, 0.2]}, "interpenetrate"),
    ({"robot__skills": ["move_to_position"]}, "not legal"),
    ({"robot__gap_limit": None}, "gap_limit is required"),
    ({"robot__base_position": [9.0, 9.0, 0.0]}, "outside floor_extent"),
    ({"constraints__0__predicate": "nonsense:sofa"}, "unknown predicate"),
    ({"constraints__0__predicate": "height_exceeds_climb:ghost"}, "unknown object"),
])
def test_validation_reports_each_violation(changes, fragment):
    problems = _mutated(**changes)
    assert any(fragment in p for p in problems), problems


@given(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6))
def test_yaw_range_is_half_open(yaw):
    d = copy.deepcopy(raw("sofa-climbing")["scene"])
    d["objects"][2]["yaw"] = yaw
    problems = validate_scene(scene_from_dict(d))
    assert any("yaw" in p for p in problems) == (not -math.pi <= yaw < math.pi)


def test_scene_dict_round_trip_is_stable():
    scene = load_benchmark_task("button-pressing").scene
    once = scene_to_dict(scene)
    assert scene_to_dict(scene_from_dict(once)) == once

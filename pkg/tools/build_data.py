"""Regenerate everything under src/toolplan/data from the sources in tools/.

* tasks/       scene and task files (from tools/scenes.py)
* gold/        gold annotations, with parameters pinned from golden traces
* fixtures/    replay transcripts, recorded by running the real pipeline
               against a stub that plays the authored stage replies below
* key_concepts/  ten stored Analyzer replies per task with planted accuracy
* classifier/  nine failure scripts with their expected failure class

Every artifact is checked before it is written: golden scripts must succeed,
fixtures must replay to the expected outcome, classifier scripts must be
classified as labelled.

Usage: python3 tools/build_data.py
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(HERE))

from scenes import all_tasks  # noqa: E402

from toolplan.benchmark import GoldAnnotation, KeyConceptGold, slug  # noqa: E402
from toolplan.harness import executed_targets, plan_shape, run_trial, script_record  # noqa: E402
from toolplan.harness import classify_error, execute_script, manipulated_objects  # noqa: E402
from toolplan.llm import ReplayBackend, StubBackend, Transcript, save_transcript  # noqa: E402
from toolplan.pipeline import METHODS, parse_analyzer_response, run_pipeline  # noqa: E402
from toolplan.planscript import QUERY_SKILLS, parse_source  # noqa: E402
from toolplan.planscript.nodes import Call, Str, statement_expr  # noqa: E402
from toolplan.scene import task_from_dict, task_to_dict, validate_scene  # noqa: E402
from toolplan.sim import SimConfig  # noqa: E402

DATA = ROOT / "src" / "toolplan" / "data"
GOLDEN = HERE / "golden"


def fixed_clock():
    """Deterministic timestamps so regenerated fixtures diff cleanly."""
    t = [1_700_000_000.0]

    def clock():
        t[0] += 1.0
        return t[0]
    return clock


# ---------------------------------------------------------------------------
# authored stage replies

ANALYZER = {
    "milk-reaching": (
        "The milk carton stands at (0.70, 0.00, 0.10) m. Its horizontal distance from the arm base is 0.70 m, "
        "which is more than the 0.60 m the gripper can reach, so grasping it directly fails. The hammer lies "
        "inside the workspace. Its head sticks out sideways from the handle, so the hammer can hook the carton "
        "from behind and drag it toward the base.",
        "- Key concept: Milk distance from the robot base; Value: 0.70 m; Constraint: The milk carton is outside "
        "the 0.60 m workspace of the arm.\nThe hammer can be used as a hook to pull the milk into reach.",
    ),
    "can-grasping": (
        "The can is at (0.72, 0.25, 0.06) m, 0.76 m from the base, beyond the 0.60 m reach. The scroll lies "
        "flat on the table and reaches from inside the workspace to x = 0.80 m, but it cannot be lifted, only "
        "dragged. The stick is within reach. If the stick pushes the can onto the scroll, dragging the scroll "
        "brings the can into the workspace.",
        "- Key concept: Can distance from the robot base; Value: 0.76 m; Constraint: The can is outside the "
        "0.60 m workspace of the arm.\nThe stick can push the can onto the scroll, and the scroll can then be "
        "dragged toward the robot.",
    ),
    "button-pressing": (
        "The button is at (0.90, 0.00, 0.03) m, 0.90 m from the base, beyond the 0.60 m reach. Each magnetic "
        "block is 0.20 m long, too short alone. Joined end to end they form a 0.40 m stick that can reach the "
        "button while the gripper stays inside the workspace.",
        "- Key concept: Button distance from the robot base; Value: 0.90 m; Constraint: The button is outside "
        "the 0.60 m workspace of the arm.\nThe two magnetic blocks can be joined into a longer stick.",
    ),
    "sofa-traversing": (
        "Sofa A ends at x = 1.50 m and sofa B starts at x = 1.80 m, so the gap is 0.30 m wide. The robot can "
        "only walk across gaps of at most 0.10 m. The surfboard is 0.70 m long and light enough to push, so it "
        "can be laid across the gap as a bridge.",
        "- Key concept: Gap width; Value: 0.30 m; Constraint: The gap is wider than the 0.10 m the robot can "
        "walk across.\nThe surfboard can bridge the gap.",
    ),
    "sofa-traversing:small-gap": (
        "Sofa A ends at x = 1.50 m and sofa B starts at x = 1.55 m, so the gap is 0.05 m wide. The robot can "
        "walk across gaps of up to 0.10 m, so it can walk straight to sofa B.",
        "No constraint is activated: the gap of 0.05 m is within the walking capability of the robot.",
    ),
    "sofa-climbing": (
        "The sofa is 0.60 m high and the robot can climb at most 0.30 m at a time. The large box is 0.40 m "
        "high, also too high from the floor, but the small box is 0.20 m high. Placed in front of the large "
        "box, the small box makes a staircase of 0.20 m steps.",
        "- Key concept: Sofa height; Value: 0.60 m; Constraint: The sofa is higher than the 0.30 m step the "
        "robot can climb.\nThe small box and the large box can form a staircase.",
    ),
    "sofa-climbing:low-sofa": (
        "The sofa is 0.25 m high and the robot can climb up to 0.30 m, so it can climb onto the sofa directly.",
        "No constraint is activated: the sofa height of 0.25 m is within the climbing capability of the robot.",
    ),
    "cube-lifting": (
        "The cube weighs 20 kg but the robot can only push 10 kg, so it cannot move the cube directly. The "
        "surfboard rests on the yoga roller with the cube on one end and the chair under the other end. This is "
        "a lever with the roller as fulcrum. With the chair pushed away, stepping on the free end lifts the cube.",
        "- Key concept: Cube weight; Value: 20 kg; Constraint: The cube is heavier than the 10 kg the robot can "
        "push.\nThe surfboard and yoga roller form a lever; the chair blocks its free end.",
    ),
}

PLANNER_DESC = {
    "milk-reaching": "The hammer is a hook: its head hooks the carton from behind and drags it into the "
                     "workspace. Then the gripper grasps the milk.",
    "can-grasping": "The stick pushes the can onto the scroll. Dragging the scroll then carries the can into "
                    "the workspace, where the gripper grasps it.",
    "button-pressing": "The two magnetic blocks join into one long stick. The gripper pushes the stick so its "
                       "tip presses the button.",
    "sofa-traversing": "The surfboard is a bridge across the gap between the sofas.",
    "sofa-traversing:small-gap": "The gap is narrow enough to walk across without tools.",
    "sofa-climbing": "The small box is a first step in front of the large box, which is the second step.",
    "sofa-climbing:low-sofa": "The sofa is low enough to climb directly.",
    "cube-lifting": "The surfboard is a lever on the yoga roller. Pushing the chair away frees the lever end; "
                    "standing on it lifts the cube.",
}

SKETCHES = {
    "milk-reaching": [
        "hammer_handle", "above the handle grasp point", "handle grasp point", "", "lift the hammer",
        "hammer head beyond the milk", "lower the hammer behind the milk", "drag the milk toward the base", "",
        "raise the gripper", "milk", "above the milk", "milk", "",
    ],
    "can-grasping": [
        "can", "stick", "stick grasp point", "", "stick end behind the can", "push the can onto the scroll", "",
        "scroll", "scroll grasp point", "", "drag the scroll toward the base", "", "can", "can", "",
    ],
    "button-pressing": [
        "block_a", "above block_a", "block_a grasp point", "", "lift block_a", "join block_a to block_b",
        "push the stick tip onto the button",
    ],
    "sofa-traversing": ["surfboard", "surfboard across the gap", "onto sofa_b"],
    "sofa-traversing:small-gap": ["onto sofa_b"],
    "sofa-climbing": ["small_box in front of the large_box", "onto the small_box", "onto the large_box",
                      "onto the sofa"],
    "sofa-climbing:low-sofa": ["in front of the sofa", "onto the sofa"],
    "cube-lifting": ["chair away from the lever end", "onto the free end of the surfboard"],
}

CALC_DESC = {
    "milk-reaching": "The handle grasp point is 0.10 m behind its center. The head sits 0.27 m ahead of and "
                     "0.055 m beside the grasp point, so a gripper at x = 0.49 m puts the head behind the carton.",
    "can-grasping": "The stick grasp point is 0.13 m behind its center. The gripper moves along y first, so the "
                    "stick is placed behind the can before pushing it along -y onto the scroll.",
    "button-pressing": "The merged stick ends 0.30 m ahead of the gripper, so x = 0.50 m puts the tip on the button.",
    "sofa-traversing": "Centered at x = 1.65 m, the 0.70 m board overlaps each sofa by 0.20 m.",
    "sofa-traversing:small-gap": "Walk to the middle of sofa B.",
    "sofa-climbing": "The small box centered at x = 1.00 m touches the large box, which starts at x = 1.20 m.",
    "sofa-climbing:low-sofa": "Stand in front of the sofa, then climb onto its top at 0.25 m.",
    "cube-lifting": "Pushing the chair 0.80 m along -y clears the lever end, which spans x = 0.30 to 0.90 m.",
}

# wrong-headed scripts used by the baseline fixtures
DIRECT = {
    "milk-reaching": "milk = get_position('milk')\nmove_to_position(milk)\nclose_gripper()\n",
    "can-grasping": "can = get_position('can')\nmove_to_position(can)\nclose_gripper()\n",
    "button-pressing": "button = get_position('button')\nmove_to_position(button)\n",
    "sofa-traversing": "walk_to_position([2.5, 0.6, 0.4])\n",
    "sofa-climbing": "climb_to_position([2.0, 0.0, 0.6])\n",
    "cube-lifting": "push_to_position('cube', [-0.7, 1.0, 0.34])\n",
}

# (task, method) -> (script, expected success) for baselines that deviate from golden
BASELINE_SCRIPTS = {
    ("sofa-climbing", "no-analyzer"): (
        "push_to_position('small_box', [1.0, 0.0, 0.1])\nwalk_to_position([1.3, -1.0, 0.0])\n"
        "climb_to_position([2.0, 0.0, 0.6])\n", False),
    ("button-pressing", "no-calculator"): (
        "a = get_position('block_a')\ngrasp = a + [-0.08, 0, 0]\nmove_to_position([grasp.x, grasp.y, 0.3])\n"
        "move_to_position(grasp)\nclose_gripper()\nmove_to_position([0.02, -0.25, 0.1])\n"
        "move_to_position([0.02, 0.25, 0.02])\nmove_to_position([0.4, 0.0, 0.02])\n", False),
    ("milk-reaching", "planner-coder"): (DIRECT["milk-reaching"], False),
}

CLASSIFIER = [
    ("tool_use", "milk-direct", "milk-reaching", DIRECT["milk-reaching"]),
    ("tool_use", "cloth-bridge", "sofa-traversing",
     "cloth = get_position('cloth')\npush_to_position('cloth', [1.2, 0.9, cloth.z])\n"
     "walk_to_position([2.5, 0.6, 0.4])\n"),
    ("tool_use", "can-direct", "can-grasping", DIRECT["can-grasping"]),
    ("logical", "lever-never-stepped", "cube-lifting", "push_to_position('chair', [0.7, -0.8, 0.075])\n"),
    ("logical", "skip-first-step", "sofa-climbing", BASELINE_SCRIPTS[("sofa-climbing", "no-analyzer")][0]),
    ("logical", "drag-before-push", "can-grasping",
     "scroll = get_position('scroll')\nmove_to_position(scroll + [-0.27, 0, 0])\nclose_gripper()\n"
     "move_to_position([0.0, -0.05, 0.0025])\nopen_gripper()\ncan = get_position('can')\n"
     "move_to_position(can)\nclose_gripper()\n"),
    ("numerical", "hook-wrong-offset", "milk-reaching",
     "handle = get_position('hammer_handle')\ngrasp = handle + [-0.1, 0, 0]\n"
     "move_to_position([grasp.x, grasp.y, 0.3])\nmove_to_position(grasp)\nclose_gripper()\n"
     "move_to_position([grasp.x, grasp.y, 0.25])\nmove_to_position([0.49, -0.2, 0.25])\n"
     "move_to_position([0.49, -0.2, 0.015])\nmove_to_position([0.25, -0.2, 0.015])\nopen_gripper()\n"
     "move_to_position([0.25, -0.2, 0.25])\nmove_to_position([0.465, 0.0, 0.25])\n"
     "move_to_position([0.465, 0.0, 0.1])\nclose_gripper()\n"),
    ("numerical", "stick-short", "button-pressing", BASELINE_SCRIPTS[("button-pressing", "no-calculator")][0]),
    ("numerical", "drag-short", "can-grasping",
     "stick = get_position('stick')\nmove_to_position(stick + [-0.13, 0, 0])\nclose_gripper()\n"
     "move_to_position([0.47, 0.31, 0.025])\nmove_to_position([0.47, -0.02, 0.025])\nopen_gripper()\n"
     "scroll = get_position('scroll')\nmove_to_position(scroll + [-0.27, 0, 0])\nclose_gripper()\n"
     "move_to_position([0.2, -0.05, 0.0025])\nopen_gripper()\nmove_to_position([0.49, -0.07, 0.065])\n"
     "close_gripper()\n"),
]

GOLD = {
    # key -> (concept name, aliases, value, unit, tolerance, keywords, tool set, uses tool, target, ordering)
    "milk-reaching": ("milk distance", ["distance to the milk", "milk reach"], 0.70, "m", 0.02,
                      ["workspace", "reach"], ["hammer_handle", "hammer_head"], True, "milk",
                      [r"hammer_handle", r"(^|[:,])milk($|,)"]),
    "can-grasping": ("can distance", ["distance to the can"], 0.76, "m", 0.02, ["workspace", "reach"],
                     ["stick", "scroll"], True, "can", [r"(^|[:,])can($|,)", r"scroll"]),
    "button-pressing": ("button distance", ["distance to the button"], 0.90, "m", 0.02, ["workspace", "reach"],
                        ["block_a", "block_b"], True, "button", [r"block_a"]),
    "sofa-traversing": ("gap width", ["gap", "width of the gap"], 0.30, "m", 0.02, ["walk"], ["surfboard"], True,
                        "sofa_b", [r"^push_to_position:.*surfboard", r"^walk_to_position"]),
    "sofa-traversing:small-gap": ("gap width", ["gap"], 0.05, "m", 0.02, ["walk"], ["surfboard"], False,
                                  "sofa_b", [r"^walk_to_position"]),
    "sofa-climbing": ("sofa height", ["height of the sofa"], 0.60, "m", 0.02, ["climb"],
                      ["small_box", "large_box"], True, "sofa",
                      [r"^push_to_position:.*small_box", r"^climb_to_position"]),
    "sofa-climbing:low-sofa": ("sofa height", ["height of the sofa"], 0.25, "m", 0.02, ["climb"],
                               ["small_box", "large_box"], False, "sofa", [r"^climb_to_position"]),
    "cube-lifting": ("cube weight", ["cube mass", "weight of the cube", "mass of the cube"], 20.0, "kg", 0.5,
                     ["push"], ["chair", "surfboard", "yoga_roller"], True, "cube",
                     [r"^push_to_position:.*chair", r"^climb_to_position"]),
}

CONSTRAINT_TEXT = {
    "milk-reaching": "Milk's position is out of robot workspace.",
    "can-grasping": "Can's position is out of robot workspace.",
    "button-pressing": "Button's position is out of robot workspace.",
    "sofa-traversing": "Gap's width is out of robot's walking capability.",
    "sofa-traversing:small-gap": "Gap's width is within robot's walking capability.",
    "sofa-climbing": "Sofa's height is out of robot's climbing capability.",
    "sofa-climbing:low-sofa": "Sofa's height is within robot's climbing capability.",
    "cube-lifting": "Cube's weight is out of robot's pushing capability.",
}

# Analyzer replies for key-concept scoring: correct phrasings and planted mistakes
KC_CORRECT = {
    "milk-reaching": [
        ("Milk distance from the robot base", "0.70 m", "The milk is outside the arm workspace."),
        ("Distance to the milk", "0.71 m", "The milk lies beyond the reach of the arm."),
        ("Horizontal milk distance", "0.70 m", "Out of the 0.60 m workspace radius."),
    ],
    "can-grasping": [
        ("Can distance from the robot base", "0.76 m", "The can is outside the arm workspace."),
        ("Distance to the can", "0.762 m", "The can lies beyond the reach of the arm."),
    ],
    "button-pressing": [
        ("Button distance from the robot base", "0.90 m", "The button is outside the arm workspace."),
        ("Distance to the button", "0.9 m", "Beyond the reach of the gripper."),
    ],
    "sofa-traversing": [
        ("Gap width", "0.30 m", "The gap is wider than the robot can walk across."),
        ("Width of the gap between the sofas", "0.3 m", "Exceeds the 0.10 m walking gap limit."),
        ("Gap's width", "0.30 m", "Out of the robot's walking capability."),
    ],
    "sofa-climbing": [
        ("Sofa height", "0.60 m", "Higher than the robot can climb."),
        ("Height of the sofa", "0.6 m", "Exceeds the 0.30 m climbing step limit."),
    ],
    "cube-lifting": [
        ("Cube weight", "20 kg", "Heavier than the robot can push."),
        ("Mass of the cube", "20.0 kg", "Exceeds the 10 kg push limit."),
    ],
}
KC_WRONG = {
    "button-pressing": [
        ("Block length", "0.20 m", "Each block alone is too short to reach the button."),
    ],
    "sofa-climbing": [
        ("Large box height", "0.40 m", "The large box is higher than the robot can climb."),
        ("Sofa height", "0.40 m", "Higher than the robot can climb."),
    ],
}
PLANTED = {"milk-reaching": 10, "can-grasping": 10, "button-pressing": 9, "sofa-traversing": 10,
           "sofa-climbing": 8, "cube-lifting": 10}


# ---------------------------------------------------------------------------
# helpers

def _num(v: float) -> str:
    """Shortest rendering with at most four decimals."""
    s = f"{round(v, 4) + 0.0:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def stage_replies(key: str, script: str, golden_trace) -> dict:
    """Authored replies for analyzer, planner, calculator and coder."""
    program = parse_source(script)
    calls = []
    for stmt in program.statements:
        e = statement_expr(stmt)
        if isinstance(e, Call):
            calls.append(e)
    sketches = SKETCHES[key]
    assert len(sketches) == len(calls), (key, len(sketches), len(calls))
    plan_lines, answer_lines = [], []
    targets = iter(executed_targets(golden_trace))
    for i, (call, sketch) in enumerate(zip(calls, sketches), start=1):
        if call.name in QUERY_SKILLS:
            arg = call.args[0].value if call.args and isinstance(call.args[0], Str) else sketch
            plan_lines.append(f"{i}. {call.name}({arg})")
            continue
        plan_lines.append(f"{i}. {call.name}({sketch})")
        t = next(targets)
        if t is not None:
            answer_lines.append(f"Step {i}: target = [{', '.join(_num(v) for v in t)}] m")
    analysis, desc = ANALYZER[key]
    return {
        "analyzer": f"Analysis:\n{analysis}\n\nDescription:\n{desc}\n",
        "planner": f"Description:\n{PLANNER_DESC[key]}\n\nPlan:\n" + "\n".join(plan_lines) + "\n",
        "calculator": f"Description:\n{CALC_DESC[key]}\n\nAnswer:\n" + "\n".join(answer_lines) + "\n",
        "coder": script,
    }


def record_fixture(task, method: str, replies: dict) -> Transcript:
    backend = StubBackend({k: [v] for k, v in replies.items()}, clock=fixed_clock())
    transcript = Transcript()
    run_pipeline(task, backend, METHODS[method], transcript=transcript)
    return transcript


def kc_reply(name: str, value: str, constraint: str) -> str:
    return (f"Analysis:\nComparing the scene with the robot limits.\n\nDescription:\n"
            f"- Key concept: {name}; Value: {value}; Constraint: {constraint}\n")


def write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------

def main() -> int:
    for sub in ("tasks", "gold", "fixtures", "key_concepts", "classifier"):
        shutil.rmtree(DATA / sub, ignore_errors=True)
    config = SimConfig()
    write_json(DATA / "sim_config.json", config.to_dict())

    tasks = {}
    for d in all_tasks():
        task = task_from_dict(d)
        problems = validate_scene(task.scene)
        assert not problems, (task.key, problems)
        tasks[task.key] = task
        write_json(DATA / "tasks" / f"{slug(task.key)}.json", task_to_dict(task))

    golds = {}
    for key, task in tasks.items():
        script = (GOLDEN / f"{slug(key)}.plan").read_text(encoding="utf-8")
        trace = execute_script(task, script, 0, config)
        rec = script_record(task, script, 0, config=config)
        assert rec.success, (key, trace.error)
        name, aliases, value, unit, tol, kws, tools, uses, target, ordering = GOLD[key]
        gold = GoldAnnotation(
            task=key, target=target,
            key_concept=KeyConceptGold(name, value, unit, CONSTRAINT_TEXT[key], tuple(aliases), tol, tuple(kws)),
            oracle_tool_set=frozenset(tools), oracle_uses_tool=uses, parameter_tolerance=0.02,
            ordering=tuple(ordering), plan_shape=plan_shape(parse_source(script)),
            parameters=tuple(executed_targets(trace)),
        )
        assert bool(manipulated_objects(trace) - {target}) == uses, key
        golds[key] = gold
        write_json(DATA / "gold" / f"{slug(key)}.json", gold.to_dict())

        replies = stage_replies(key, script, trace)
        methods = list(METHODS) if ":" not in key else ["full"]
        for method in methods:
            r = dict(replies)
            expect = True
            if method == "coder-only":
                r["coder"], expect = DIRECT[key], False
            elif (key, method) in BASELINE_SCRIPTS:
                r["coder"], expect = BASELINE_SCRIPTS[(key, method)]
            transcript = record_fixture(task, method, r)
            path = DATA / "fixtures" / "golden" / slug(key) / f"{method}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            save_transcript(transcript, path)
            replay = ReplayBackend.from_file(path, strict=True)
            out = run_trial(task, method, replay, 0, gold=gold, config=config)
            assert out.success == expect, (key, method, out.error, out.failure_class)
            print(f"fixture {key:28s} {method:14s} success={out.success} class={out.failure_class}")

    for task_id, n_correct in PLANTED.items():
        correct = KC_CORRECT[task_id]
        wrong = KC_WRONG.get(task_id, [])
        replies = [kc_reply(*correct[i % len(correct)]) for i in range(n_correct)]
        replies += [kc_reply(*wrong[i % len(wrong)]) for i in range(10 - n_correct)]
        for text in replies:
            parse_analyzer_response(text)
        write_json(DATA / "key_concepts" / f"{task_id}.json",
                   {"task": task_id, "planted_correct": n_correct, "outputs": replies})

    for i, (expected, name, key, script) in enumerate(CLASSIFIER, start=1):
        rec = script_record(tasks[key], script, 0, config=config)
        assert not rec.success, name
        got = classify_error(rec, golds[key])
        assert got == expected, (name, got, rec.error)
        write_json(DATA / "classifier" / f"{i:02d}_{name}.json",
                   {"name": name, "task": key, "expected": expected, "script": script})
        print(f"classifier {name:22s} -> {got}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

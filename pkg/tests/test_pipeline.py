from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toolplan.benchmark import load_benchmark_task
from toolplan.llm import ReplayBackend, StubBackend, Transcript
from toolplan.pipeline import (
    METHODS,
    AblationConfig,
    AnalyzerOutput,
    PipelineError,
    PlanSkeleton,
    PlanStep,
    Quantity,
    SectionError,
    StageContext,
    augment_description,
    extract_code,
    method_config,
    parse_analyzer_response,
    parse_answer,
    parse_plan_lines,
    parse_two_section,
    run_coder,
    run_pipeline,
    run_planner,
)
from toolplan.pipeline import _FormatProblem

QUAD = load_benchmark_task("sofa-traversing").scene.robot
ARM = load_benchmark_task("milk-reaching").scene.robot

GOOD_PLAN = """Description:
Bridge the gap.

Plan:
1. get_position(surfboard)
2. push_to_position(surfboard across the gap)
3. walk_to_position(onto sofa_b)
"""


# ---------------------------------------------------------------- section parsing

@pytest.mark.parametrize("text", [
    "Analysis: a\nDescription: b",
    "## Analysis:\na\n\n## Description:\nb\n",
    "**Analysis:**\na\n**Description:**\nb",
    "analysis :a\nDESCRIPTION:   b  ",
    "__Analysis__: a\n# Description: b",
])
def test_two_section_header_styles(text):
    assert parse_two_section(text, "Analysis", "Description") == ("a", "b")


def test_two_section_errors():
    with pytest.raises(SectionError) as exc:
        parse_two_section("Analysis: only", "Analysis", "Description")
    assert exc.value.label == "Description"
    with pytest.raises(SectionError):
        parse_two_section("Description: b\nAnalysis: a", "Analysis", "Description")
    with pytest.raises(ValueError):
        parse_two_section("x", "Plan", "plan:")


@given(st.text(alphabet=st.characters(blacklist_characters=":\r"), max_size=40),
       st.text(alphabet=st.characters(blacklist_characters=":\r"), max_size=40))
def test_two_section_recovers_bodies(a, b):
    # without a colon no line can look like a header
    text = f"Analysis:\n{a}\nDescription:\n{b}"
    assert parse_two_section(text, "Analysis", "Description") == (a.strip(), b.strip())


def test_analyzer_concepts():
    out = parse_analyzer_response(
        "Analysis:\nwhy\n\nDescription:\n- Key concept: Gap width; Value: 0.30 m; Constraint: too wide to walk.\n"
        "* key concept: cube mass; value: 2e1 kg; constraint: too heavy\nfree text\n")
    assert [(c.name, c.value, c.unit) for c in out.concepts] == [("Gap width", 0.3, "m"), ("cube mass", 20.0, "kg")]
    assert out.concepts[1].related_constraint == "too heavy"
    with pytest.raises(ValueError, match="malformed key concept"):
        parse_analyzer_response("Analysis:\nx\nDescription:\n- Key concept: gap; Value: wide; Constraint: c\n")


# ---------------------------------------------------------------- plan and answer parsing

def test_plan_line_styles():
    text = "1. get_position(surfboard)\n- 2) `push_to_position` - move it\nStep 3: walk_to_position\nnotes"
    steps = parse_plan_lines(text, set(QUAD.skills))
    assert [(s.index, s.skill, s.arguments) for s in steps] == [
        (1, "get_position", "surfboard"), (2, "push_to_position", "move it"), (3, "walk_to_position", "")]


@pytest.mark.parametrize("text, kind", [
    ("1. fly_to(sofa)", "unknown_skill"),
    ("1. move_to_position(x)", "unknown_skill"),
    ("no steps here", "empty_plan"),
    ("1. get_position(a)\n3. get_position(b)", "unparseable"),
    ("1. ???", "unparseable"),
])
def test_plan_line_problems(text, kind):
    with pytest.raises(_FormatProblem) as exc:
        parse_plan_lines(text, set(QUAD.skills))
    assert exc.value.kind == kind


SKELETON = PlanSkeleton("d", (PlanStep(1, "get_position", "surfboard"), PlanStep(2, "push_to_position", "board"),
                              PlanStep(3, "walk_to_position", "sofa_b")))


def test_answer_parsing():
    plan = parse_answer("Step 2: target = [1.65, 0.3, 0.42] m; yaw = 0.5 rad\n"
                        "step 3: target = [2.5, .6, 4e-1]\nignored line", SKELETON)
    params = dict((s.index, p) for s, p in plan.steps)
    assert params[1] == {}
    assert params[2] == {"target": Quantity((1.65, 0.3, 0.42), "m"), "yaw": Quantity(0.5, "rad")}
    assert params[3]["target"].value == (2.5, 0.6, 0.4)
    assert plan.render().splitlines()[1] == "2. push_to_position(board) | target = [1.65, 0.3, 0.42] m; yaw = 0.5 rad"


@pytest.mark.parametrize("answer, kind", [
    ("Step 4: target = [1, 2, 3] m\nStep 2: target = [1, 2, 3]\nStep 3: target = [1, 2, 3]", "step_index_mismatch"),
    ("Step 2: speed = 3\nStep 3: target = [1, 2, 3]", "unknown_parameter"),
    ("Step 2: target = far away\nStep 3: target = [1, 2, 3]", "non_numeric_parameter"),
    ("Step 2: target = 1.0 m\nStep 3: target = [1, 2, 3]", "non_numeric_parameter"),
    ("Step 2: yaw = [1, 2, 3]\nStep 3: target = [1, 2, 3]", "non_numeric_parameter"),
    ("Step 2: target = [1, 2, 3]", "missing_target"),
])
def test_answer_problems(answer, kind):
    with pytest.raises(_FormatProblem) as exc:
        parse_answer(answer, SKELETON)
    assert exc.value.kind == kind


@given(st.tuples(*[st.floats(-100, 100, allow_nan=False)] * 3))
def test_rendered_answers_parse_back(v):
    line = f"Step 3: target = {Quantity(v, 'm').render()}"
    plan = parse_answer("Step 2: target = [0, 0, 0]\n" + line, SKELETON)
    assert plan.steps[2][1]["target"].value == tuple(float(x) for x in v)


def test_extract_code():
    assert extract_code("Here:\n```python\na = 1\n```\ntrailing") == "a = 1\n"
    assert extract_code("a = 1") == "a = 1\n"
    assert extract_code("   ") == ""


# ---------------------------------------------------------------- ablations

def test_ablation_configs():
    assert [m.name for m in METHODS.values()] == list(METHODS)
    assert METHODS["full"].stages() == ("analyzer", "planner", "calculator", "coder")
    assert METHODS["planner-coder"].stages() == ("planner", "coder")
    assert METHODS["coder-only"].stages() == ("coder",)
    with pytest.raises(ValueError):
        AblationConfig(use_analyzer=True, use_calculator=False, use_planner=False)
    with pytest.raises(ValueError):
        AblationConfig(use_analyzer=False, use_calculator=True, use_planner=False)
    with pytest.raises(ValueError, match="unknown method"):
        method_config("oracle")


def test_augmented_description():
    out = AnalyzerOutput("a", (), "- Key concept: x")
    assert augment_description("L", out) == "L\n\n- Key concept: x\n"
    assert augment_description("L\n", out) == "L\n\n- Key concept: x\n"
    assert augment_description("L\n", AnalyzerOutput("a", (), "  ")) == "L\n"


# ---------------------------------------------------------------- re-prompting

def test_one_reprompt_then_success():
    stub = StubBackend({"planner": ["I think we should bridge it.", GOOD_PLAN]})
    ctx = StageContext(stub, Transcript(), QUAD)
    skel = run_planner("L*", ctx)
    assert [s.skill for s in skel.steps] == ["get_position", "push_to_position", "walk_to_position"]
    assert skel.raw == GOOD_PLAN
    second = ctx.transcript.entries[1].request.messages
    assert [m.role for m in second] == ["system", "user", "assistant", "user"]
    assert second[2].content == "I think we should bridge it."
    assert "Plan:" in second[3].content


def test_second_format_failure_is_fatal():
    stub = StubBackend({"planner": "1. fly_to(sofa)"})
    ctx = StageContext(stub, Transcript(), QUAD)
    with pytest.raises(PipelineError) as exc:
        run_planner("L*", ctx)
    assert (exc.value.stage, exc.value.kind) == ("planner", "missing_section")
    assert len(ctx.transcript) == 2


def test_coder_rejects_cross_embodiment_scripts():
    stub = StubBackend({"coder": ["climb_to_position([0.5, 0, 0.2])", "```\nmove_to_position([0.3, 0, 0.2])\n```"]})
    ctx = StageContext(stub, Transcript(), ARM)
    assert run_coder("plan", ctx) == "move_to_position([0.3, 0, 0.2])\n"
    assert "climb_to_position" in ctx.transcript.entries[1].request.messages[-1].content

    stub = StubBackend({"coder": "a = = 1"})
    with pytest.raises(PipelineError) as exc:
        run_coder("plan", StageContext(stub, Transcript(), ARM))
    assert exc.value.kind == "parse_failure"


def test_backend_errors_name_the_stage():
    task = load_benchmark_task("sofa-traversing")
    tr = Transcript()
    stub = StubBackend({"analyzer": "Analysis: a\nDescription: b"})
    with pytest.raises(PipelineError) as exc:
        run_pipeline(task, stub, transcript=tr)
    assert (exc.value.stage, exc.value.kind) == ("planner", "backend")
    assert tr.stages() == ["analyzer"]


# ---------------------------------------------------------------- data flow

def test_full_pipeline_data_flow(golden):
    task = load_benchmark_task("sofa-traversing")
    res = run_pipeline(task, golden(task.key, "full", 0))
    assert res.augmented == res.query + "\n" + res.analyzer.description_section + "\n"
    planner_prompt = res.transcript.entries[1].request.messages[1].content
    assert res.augmented in planner_prompt
    calc_prompt = res.transcript.entries[2].request.messages[1].content
    assert "2. push_to_position(surfboard across the gap)" in calc_prompt
    coder_prompt = res.transcript.entries[3].request.messages[1].content
    assert res.plan.render() in coder_prompt
    assert "target = [1.65, 0.3, 0.42] m" in coder_prompt
    assert res.source.startswith("board = get_position('surfboard')")


def test_coder_only_sees_the_raw_query(golden):
    task = load_benchmark_task("cube-lifting")
    res = run_pipeline(task, golden(task.key, "coder-only", 0), METHODS["coder-only"])
    assert res.analyzer is None and res.skeleton is None and res.plan is None
    assert res.query in res.transcript.entries[0].request.messages[1].content


def test_strict_replay_of_golden_fixtures(golden_root):
    from toolplan.benchmark import fixture_file
    for key in ("milk-reaching", "cube-lifting"):
        for method in METHODS:
            be = ReplayBackend.from_file(fixture_file(golden_root, key, method), strict=True)
            run_pipeline(load_benchmark_task(key), be, METHODS[method])

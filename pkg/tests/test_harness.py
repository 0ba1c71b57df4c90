from __future__ import annotations

from fractions import Fraction

import pytest

from toolplan.benchmark import load_benchmark_task, load_gold
from toolplan.harness import (
    TrialRecord,
    classify_error,
    emit_report,
    executed_targets,
    format_rate,
    load_records,
    manipulated_objects,
    ordering_violated,
    plan_shape,
    render_report,
    report_tables,
    run_benchmark,
    run_discriminative,
    run_trial,
    save_record,
    score_key_concepts,
    script_record,
    success_table,
    trace_events,
    uses_tool,
)
from toolplan.llm import StubBackend
from toolplan.planscript import parse_source

BRIDGE = ("board = get_position('surfboard')\n"
          "push_to_position('surfboard', [1.65, 0.3, 0.42])\n"
          "walk_to_position([2.5, 0.6, 0.4])\n")
DIRECT = "walk_to_position([2.5, 0.6, 0.4])\n"


def rec(task="milk-reaching", method="full", seed=0, success=True, cls=None, source="open_gripper()\n"):
    return TrialRecord(task, method, seed, None, source, None, success, cls or ("none" if success else "logical"))


@pytest.fixture(scope="module")
def sofa():
    return load_benchmark_task("sofa-traversing")


# ---------------------------------------------------------------- records

def test_record_invariants():
    with pytest.raises(ValueError, match="unknown failure class"):
        rec(success=False, cls="cosmic_ray")
    with pytest.raises(ValueError):
        rec(success=True, cls="logical")
    with pytest.raises(ValueError):
        rec(success=False, cls="none")
    with pytest.raises(ValueError, match="stage_failure"):
        rec(success=False, cls="stage_failure", source="x()")
    r = rec(success=False, cls="stage_failure", source=None)
    assert TrialRecord.from_dict(r.to_dict()) == r


def test_save_and_load_records(tmp_path, sofa):
    r = script_record(sofa, BRIDGE, seed=4)
    d = save_record(r, tmp_path)
    assert {p.name for p in d.iterdir()} == {"record.json", "script.plan", "trace.json"}
    (back,) = load_records(tmp_path)
    assert back.to_dict() == r.to_dict()
    assert back.trace.to_dict() == r.trace.to_dict()


# ---------------------------------------------------------------- trace analysis

def test_trace_events_and_manipulated_objects(sofa):
    r = script_record(sofa, BRIDGE)
    assert r.success
    assert trace_events(r.trace) == ["push_to_position:surfboard", "walk_to_position:"]
    assert manipulated_objects(r.trace) == {"surfboard"}
    assert uses_tool(r.trace, "sofa_b")
    assert not uses_tool(script_record(sofa, DIRECT).trace, "sofa_b")
    assert not uses_tool(None, "sofa_b")


def test_executed_targets_include_the_failing_call(sofa):
    r = script_record(sofa, DIRECT)
    assert r.trace.error["kind"] == "gap_too_wide"
    assert executed_targets(r.trace) == [(2.5, 0.6, 0.4)]


def test_plan_shape_keeps_mutating_calls_in_order():
    prog = parse_source("a = get_position('x')\npush_to_position('x', get_position('y') + [0, 0, 1])\n"
                        "walk_to_position(a)\n")
    assert plan_shape(prog) == ("push_to_position", "walk_to_position")


@pytest.mark.parametrize("events, violated", [
    (["push:board", "walk:"], False),
    (["walk:", "push:board"], True),
    (["walk:"], True),
    (["push:board"], False),
    ([], False),
])
def test_ordering(events, violated):
    assert ordering_violated(events, ["^push:.*board", "^walk"]) is violated


def test_classify_error_preconditions(sofa):
    gold = load_gold("sofa-traversing")
    with pytest.raises(ValueError, match="successful"):
        classify_error(script_record(sofa, BRIDGE), gold)
    with pytest.raises(ValueError, match="script"):
        classify_error(rec(task=sofa.key, success=False, cls="stage_failure", source=None), gold)


def test_missing_tool_takes_precedence(sofa):
    r = script_record(sofa, DIRECT, gold=load_gold("sofa-traversing"))
    assert r.failure_class == "tool_use"


def test_wrong_parameters_are_numerical_unless_a_constraint_fires(sofa):
    gold = load_gold("sofa-traversing")
    short = BRIDGE.replace("[1.65, 0.3, 0.42]", "[1.3, 0.3, 0.42]")
    assert script_record(sofa, short, gold=gold).failure_class == "logical"  # gap_too_wide
    off = BRIDGE.replace("[2.5, 0.6, 0.4]", "[1.65, 0.3, 0.47]")
    r = script_record(sofa, off, gold=gold)
    assert r.trace.error["kind"] == "invalid_target"
    assert r.failure_class == "numerical"


# ---------------------------------------------------------------- rates and reports

@pytest.mark.parametrize("x, text", [
    (Fraction(1), "1.00"),
    (Fraction(0), "0.00"),
    (Fraction(1, 8), "0.13"),
    (Fraction(1, 200), "0.01"),
    (Fraction(2, 3), "0.67"),
    (Fraction(7, 10), "0.70"),
    (None, "n/a"),
])
def test_format_rate_rounds_half_up(x, text):
    assert format_rate(x) == text


def test_success_table_is_exact():
    records = [rec(seed=s, success=s < 2) for s in range(3)] + [rec(task="cube-lifting", success=True)]
    table = success_table(records)
    assert table.methods == ["full"]
    assert table.tasks == ["milk-reaching", "cube-lifting"]
    assert table.rate("full", "milk-reaching") == Fraction(2, 3)
    assert table.average("full") == Fraction(5, 6)
    assert table.average("coder-only") is None


def test_report_tables_and_rendering(sofa):
    gold = load_gold("sofa-traversing")
    records = [script_record(sofa, BRIDGE, s, method="full") for s in range(3)]
    records.append(script_record(sofa, DIRECT, 3, method="full", gold=gold))
    tables = report_tables(records)
    assert tables["success"] == (["method", "sofa-traversing", "Average"], [["full", "0.75", "0.75"]])
    assert "key_concepts" not in tables
    header, rows = tables["errors"]
    assert rows[0] == ["full", "all", "1", "0", "0", "0"]
    md = render_report(records, "md")
    assert md.startswith("## Success rate\n") and "| full | 0.75 | 0.75 |" in md
    csv_text = render_report(list(reversed(records)), "csv")
    assert csv_text.splitlines()[0] == "table,row,column,value"
    assert "success,full,sofa-traversing,0.75" in csv_text
    assert "errors,full/all,tool_use,1" in csv_text
    with pytest.raises(ValueError, match="unsupported report format"):
        render_report(records, "pdf")


def test_emit_report(tmp_path, sofa):
    with pytest.raises(ValueError, match="no records"):
        emit_report([], "md", tmp_path)
    paths = emit_report([script_record(sofa, BRIDGE)], ["csv", "md"], tmp_path / "out")
    assert [p.name for p in paths] == ["report.csv", "report.md"]


def test_key_concept_scores():
    assert score_key_concepts({"milk-reaching": []}, {"milk-reaching": load_gold("milk-reaching")}) == {
        "milk-reaching": None}
    with pytest.raises(KeyError):
        score_key_concepts({"milk-reaching": []}, {})


# ---------------------------------------------------------------- runners

def test_run_trial_captures_stage_failures():
    r = run_trial(load_benchmark_task("milk-reaching"), "full", StubBackend({}), 0)
    assert r.failure_class == "stage_failure"
    assert r.error["stage"] == "analyzer" and r.source is None


def test_run_benchmark_argument_checks(sofa):
    with pytest.raises(ValueError, match="at least 1"):
        run_benchmark([sofa], ["full"], 0, StubBackend({}))
    with pytest.raises(ValueError, match="unknown method"):
        run_benchmark([sofa], ["oracle"], 1, StubBackend({}))
    with pytest.raises(ValueError, match="seeds"):
        run_benchmark([sofa], ["full"], 2, StubBackend({}), seeds=[1])


def test_run_benchmark_parallel_matches_serial(golden):
    tasks = [load_benchmark_task("milk-reaching"), load_benchmark_task("cube-lifting")]
    serial, a = run_benchmark(tasks, ["coder-only", "full"], 2, golden)
    threaded, b = run_benchmark(tasks, ["coder-only", "full"], 2, golden, parallelism=4)
    assert serial == threaded
    assert [r.to_dict() | {"wall_time": 0} for r in a] == [r.to_dict() | {"wall_time": 0} for r in b]


def test_run_discriminative_argument_checks():
    with pytest.raises(ValueError, match="family"):
        run_discriminative("teleporting", [], "full", StubBackend({}), 1)
    with pytest.raises(ValueError, match="variant"):
        run_discriminative("sofa-traversing", ["huge-gap"], "full", StubBackend({}), 1)
    assert run_discriminative("sofa-traversing", ["small-gap"], "full", StubBackend({}), 0) == {}

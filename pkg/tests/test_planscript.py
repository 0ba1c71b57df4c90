from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings

from toolplan.benchmark import load_benchmark_task
from toolplan.planscript import (
    BareCall,
    BinOp,
    Binding,
    Call,
    Comp,
    ExecutionTrace,
    Limits,
    Name,
    Neg,
    Num,
    PlanScriptRuntimeError,
    PlanScriptSyntaxError,
    Program,
    Scalar,
    Str,
    Var,
    Vec,
    Vector,
    interpret,
    parse_source,
    pretty_print,
    static_check,
    tokenize,
)

from .strategies import programs

ARM = load_benchmark_task("milk-reaching").scene.robot
QUAD = load_benchmark_task("sofa-climbing").scene.robot


class FakeEnv:
    """Records calls; positions are fixed vectors, mutating skills bump a counter."""

    def __init__(self, fail: str | None = None):
        self.calls = []
        self.moves = 0
        self.fail = fail
        self.last_detail = None

    def call(self, skill, args):
        self.calls.append((skill, args))
        if skill == self.fail:
            raise PlanScriptRuntimeError("unknown_skill", f"no {skill}")
        if skill == "get_position":
            return Vector(np.array([1.0, 2.0, 3.0]), "m")
        self.moves += 1
        self.last_detail = {"moves": self.moves}
        return None

    def snapshot(self):
        return {"moves": self.moves}


# ---------------------------------------------------------------- lexer and parser

def test_precedence_and_associativity():
    prog = parse_source("a = 1 - 2 - 3 * -x.y / 4m\n")
    (stmt,) = prog.statements
    assert stmt == Binding("a", BinOp("-", BinOp("-", Num(1.0), Num(2.0)),
                                      BinOp("/", BinOp("*", Num(3.0), Neg(Comp(Var("x"), "y"))), Num(4.0, "m"))))


def test_calls_strings_vectors_and_comments():
    prog = parse_source("# header\n\nmove_to_position([a.x, 0.5, .25m])  # trailing\nb = get_position('hammer head')\n")
    assert prog.statements == (
        BareCall(Call("move_to_position", (Vec((Comp(Var("a"), "x"), Num(0.5), Num(0.25, "m"))),))),
        Binding("b", Call("get_position", (Str("hammer head"),))),
    )


def test_numbers():
    toks = tokenize("1 2. .5 1e3 2.5e-2kg 3rad")
    assert [(t.value, t.unit) for t in toks] == [(1.0, None), (2.0, None), (0.5, None), (1000.0, None),
                                                  (0.025, "kg"), (3.0, "rad")]


@pytest.mark.parametrize("source, line, col, fragment", [
    ("a = 1\nb = $", 2, 5, "illegal character"),
    ("a = 3cm", 1, 6, "invalid unit suffix"),
    ("a = 1e999", 1, 5, "out of range"),
    ("get_position('milk", 1, 14, "unterminated string"),
    ("get_position('mi@lk')", 1, 17, "illegal character"),
    ("a = (1 + 2", 1, 11, "expected ')'"),
    ("a = [1, 2]", 1, 10, "expected ','"),
    ("a = b.w", 1, 7, "component name"),
    ("1 + 2", 1, 3, "skill call or an assignment"),
    ("a = 'milk'", 1, 5, "only allowed as skill arguments"),
    ("a = 1 2", 1, 7, "end of statement"),
    ("a =", 1, 4, "expected an expression"),
])
def test_errors_are_located(source, line, col, fragment):
    with pytest.raises(PlanScriptSyntaxError) as exc:
        parse_source(source)
    assert (exc.value.line, exc.value.col) == (line, col)
    assert fragment in exc.value.message


def test_nesting_limit_is_a_located_error():
    with pytest.raises(PlanScriptSyntaxError, match="nested too deeply"):
        parse_source("a = " + "(" * 200 + "1" + ")" * 200)
    with pytest.raises(PlanScriptSyntaxError, match="nested too deeply"):
        parse_source("a = " + "-" * 200 + "1")


def test_pretty_print_is_canonical():
    src = "a=get_position( 'milk' )\nmove_to_position(a+[0,0,(0.1)]*2)\n"
    assert pretty_print(parse_source(src)) == (
        "a = get_position('milk')\nmove_to_position(a + [0.0, 0.0, 0.1] * 2.0)\n")
    assert pretty_print(Program()) == ""
    assert pretty_print(parse_source("a = (1 - 2) - (3 - 4)")) == "a = 1.0 - 2.0 - (3.0 - 4.0)\n"
    assert pretty_print(parse_source("a = -(-1).x")) == "a = -(-1.0).x\n"


@settings(max_examples=300, deadline=None)
@given(programs())
def test_printing_is_idempotent(prog):
    text = pretty_print(prog)
    assert pretty_print(parse_source(text)) == text


# ---------------------------------------------------------------- interpreter

def test_interpreter_binds_and_calls():
    env = FakeEnv()
    trace = interpret(parse_source("p = get_position('milk')\nmove_to_position(p + [0, 0, 0.1m])\n"), env)
    assert trace.error is None
    assert env.calls[0] == ("get_position", [Name("milk")])
    skill, (arg,) = env.calls[1]
    assert skill == "move_to_position" and arg == Vector(np.array([1.0, 2.0, 3.1]), "m")
    assert [e.op for e in trace.entries] == ["get_position", "move_to_position"]
    assert [e.snapshot for e in trace.entries] == [0, 1]
    assert trace.snapshots == [{"moves": 0}, {"moves": 1}]
    assert trace.entries[1].detail["moves"] == 1


@pytest.mark.parametrize("source, kind", [
    ("a = 1m + 1kg", "type_error"),
    ("a = [1, 2, 3] * [1, 2, 3]", "type_error"),
    ("a = 1 / 0", "division_by_zero"),
    ("a = b", "unbound_variable"),
    ("a = 1\nb = a.x", "type_error"),
    ("a = [1m, 2kg, 3]", "type_error"),
    ("a = 1m * 2m", "type_error"),
    ("a = [1, 2, 3] + 1", "type_error"),
])
def test_runtime_errors_stop_execution(source, kind):
    env = FakeEnv()
    trace = interpret(parse_source(source + "\nclose_gripper()\n"), env)
    assert trace.error["kind"] == kind
    assert env.calls == []
    assert trace.entries[-1].error is not None


def test_unit_algebra():
    env = FakeEnv()
    trace = interpret(parse_source("a = 2m / 2m\nb = 3m / 2\nc = [1, 2, 4m] / 2\n"), env)
    assert trace.entries[0].result == Scalar(1.0, None)
    assert trace.entries[1].result == Scalar(1.5, "m")
    assert trace.entries[2].result == Vector(np.array([0.5, 1.0, 2.0]), "m")


def test_skill_error_halts_and_is_recorded():
    env = FakeEnv(fail="close_gripper")
    trace = interpret(parse_source("open_gripper()\nclose_gripper()\nopen_gripper()\n"), env)
    assert [e.op for e in trace.entries] == ["open_gripper", "close_gripper"]
    assert trace.error == {"kind": "unknown_skill", "message": "no close_gripper", "values": {}}


def test_statement_budget():
    trace = interpret(parse_source("open_gripper()\n" * 5), FakeEnv(), Limits(max_statements=3))
    assert trace.entries[-1].op == "<budget>"
    assert trace.error["kind"] == "budget_exceeded"
    assert len(trace.entries) == 4


def test_trace_json_round_trip(tmp_path):
    trace = interpret(parse_source("p = get_position('milk')\nx = p.x * 2\nmove_to_position(p)\n"), FakeEnv())
    trace.save(tmp_path / "trace.json")
    back = ExecutionTrace.load(tmp_path / "trace.json")
    assert back.to_dict() == trace.to_dict()
    assert back.entries[1].result == Scalar(2.0, "m")
    with pytest.raises(ValueError):
        ExecutionTrace.from_dict({"version": 2})


# ---------------------------------------------------------------- static checks

@pytest.mark.parametrize("source, robot, kinds", [
    ("climb_to_position([0.5, 0, 0.2])", ARM, ["unknown_skill"]),
    ("move_to_position([0.5, 0, 0.2])", QUAD, ["unknown_skill"]),
    ("move_to_position([0.5, 0, 0.2], [1, 1, 1])", ARM, ["arity"]),
    ("push_to_position('box')", QUAD, ["arity"]),
    ("push_to_position([1, 2, 3], [1, 2, 3])", QUAD, ["argument_kind"]),
    ("get_position(milk)", ARM, ["argument_kind", "unbound_variable"]),
    ("move_to_position(p)\np = get_position('milk')", ARM, ["unbound_variable"]),
    ("push_to_position('box', [1, 2, 0.1], 0.5rad)", QUAD, []),
    ("p = get_position('milk')\nmove_to_position(p)", ARM, []),
])
def test_static_check(source, robot, kinds):
    assert [f.kind for f in static_check(parse_source(source), robot)] == kinds


def test_grammar_doc_matches_the_parser():
    from pathlib import Path

    from toolplan.planscript import GRAMMAR

    doc = (Path(__file__).resolve().parents[1] / "docs" / "grammar.md").read_text(encoding="utf-8")
    assert GRAMMAR.rstrip() in doc

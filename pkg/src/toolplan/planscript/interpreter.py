"""Straight-line interpreter producing an execution trace."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

from .nodes import BinOp, Binding, Call, Comp, Neg, Num, Program, Str, Var, Vec, statement_expr
from .values import (
    NONE,
    Name,
    PlanScriptRuntimeError,
    Scalar,
    SkillCallError,
    binary,
    component,
    make_vector,
    negate,
    value_from_json,
)


class Environment(Protocol):
    def call(self, skill: str, args: list) -> Any: ...

    def snapshot(self) -> dict: ...


@dataclass(frozen=True)
class Limits:
    max_statements: int = 200


@dataclass
class TraceEntry:
    index: int
    op: str  # skill name, "<eval>" for pure statements, "<budget>" for the budget stop
    args: list = field(default_factory=list)
    result: Any = None
    error: dict | None = None
    snapshot: int = 0
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "op": self.op,
            "args": [a.to_json() for a in self.args],
            "result": self.result.to_json() if self.result is not None else None,
            "error": self.error,
            "snapshot": self.snapshot,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceEntry":
        return cls(
            index=d["index"], op=d["op"],
            args=[value_from_json(a) for a in d["args"]],
            result=value_from_json(d["result"]) if d["result"] is not None else None,
            error=d["error"], snapshot=d["snapshot"], detail=d.get("detail", {}),
        )


@dataclass
class ExecutionTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    snapshots: list[dict] = field(default_factory=list)

    @property
    def error(self) -> dict | None:
        for e in self.entries:
            if e.error is not None:
                return e.error
        return None

    @property
    def final_snapshot(self) -> dict | None:
        return self.snapshots[-1] if self.snapshots else None

    def to_dict(self) -> dict:
        return {"version": 1, "entries": [e.to_dict() for e in self.entries], "snapshots": self.snapshots}

    @classmethod
    def from_dict(cls, d: dict) -> "ExecutionTrace":
        if d.get("version") != 1:
            raise ValueError(f"unsupported trace version {d.get('version')!r}")
        return cls([TraceEntry.from_dict(e) for e in d["entries"]], list(d["snapshots"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ExecutionTrace":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class _Run:
    def __init__(self, env: Environment):
        self.env = env
        self.vars: dict[str, Any] = {}
        self.calls: list[dict] = []

    def eval(self, e):
        if isinstance(e, Num):
            return Scalar(e.value, e.unit)
        if isinstance(e, Str):
            return Name(e.value)
        if isinstance(e, Var):
            if e.name not in self.vars:
                raise PlanScriptRuntimeError("unbound_variable", f"variable {e.name!r} is not bound")
            return self.vars[e.name]
        if isinstance(e, Vec):
            return make_vector([self.eval(i) for i in e.items])
        if isinstance(e, Comp):
            return component(self.eval(e.expr), e.axis)
        if isinstance(e, Neg):
            return negate(self.eval(e.expr))
        if isinstance(e, BinOp):
            return binary(e.op, self.eval(e.left), self.eval(e.right))
        if isinstance(e, Call):
            args = [self.eval(a) for a in e.args]
            self.calls.append({"skill": e.name, "args": [a.to_json() for a in args]})
            self.last_args = args
            result = self.env.call(e.name, args)
            return NONE if result is None else result
        raise TypeError(e)


def _error_dict(exc: Exception) -> dict:
    if isinstance(exc, SkillCallError):
        return {"kind": exc.kind, "message": str(exc), "values": exc.values()}
    if isinstance(exc, PlanScriptRuntimeError):
        return {"kind": exc.kind, "message": exc.message, "values": {}}
    raise exc


def interpret(program: Program, env: Environment, limits: Limits = Limits()) -> ExecutionTrace:
    """Execute ``program`` statement by statement against ``env``.

    Execution halts at the first error, which is recorded on the last entry.
    """
    trace = ExecutionTrace(snapshots=[env.snapshot()])
    run = _Run(env)
    for idx, stmt in enumerate(program.statements):
        if idx >= limits.max_statements:
            trace.entries.append(TraceEntry(
                index=idx, op="<budget>", snapshot=len(trace.snapshots) - 1,
                error={"kind": "budget_exceeded",
                       "message": f"statement budget of {limits.max_statements} exceeded", "values": {}},
            ))
            break
        expr = statement_expr(stmt)
        op = expr.name if isinstance(expr, Call) else "<eval>"
        run.calls = []
        run.last_args = []
        entry = TraceEntry(index=idx, op=op)
        try:
            value = run.eval(expr)
            if isinstance(stmt, Binding):
                run.vars[stmt.name] = value
            entry.result = value
        except (SkillCallError, PlanScriptRuntimeError) as exc:
            entry.error = _error_dict(exc)
        if isinstance(expr, Call):
            entry.args = list(run.last_args) if run.calls and run.calls[-1]["skill"] == expr.name else []
        detail = getattr(env, "last_detail", None)
        if run.calls:
            entry.detail = {"calls": run.calls}
            if detail:
                entry.detail.update(detail)
        snap = env.snapshot()
        if snap != trace.snapshots[-1]:
            trace.snapshots.append(snap)
        entry.snapshot = len(trace.snapshots) - 1
        trace.entries.append(entry)
        if entry.error is not None:
            break
    return trace

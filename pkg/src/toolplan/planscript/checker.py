"""Static checks: skill membership, arity, argument kinds, binding order."""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import Binding, Call, Comp, Neg, BinOp, Program, Str, Var, Vec, statement_expr
from .signatures import SIGNATURES


@dataclass(frozen=True)
class Finding:
    kind: str  # unknown_skill | arity | argument_kind | unbound_variable
    statement: int
    message: str


def _walk(expr, bound: set[str], idx: int, skills, out: list[Finding]):
    if isinstance(expr, Var):
        if expr.name not in bound:
            out.append(Finding("unbound_variable", idx, f"variable {expr.name!r} used before assignment"))
    elif isinstance(expr, Vec):
        for i in expr.items:
            _walk(i, bound, idx, skills, out)
    elif isinstance(expr, (Neg, Comp)):
        _walk(expr.expr, bound, idx, skills, out)
    elif isinstance(expr, BinOp):
        _walk(expr.left, bound, idx, skills, out)
        _walk(expr.right, bound, idx, skills, out)
    elif isinstance(expr, Call):
        sig = SIGNATURES.get(expr.name)
        if expr.name not in skills or sig is None:
            out.append(Finding("unknown_skill", idx, f"skill {expr.name!r} is not available to this robot"))
        else:
            n = len(expr.args)
            if not sig.min_arity <= n <= sig.max_arity:
                want = (str(sig.min_arity) if sig.min_arity == sig.max_arity
                        else f"{sig.min_arity}-{sig.max_arity}")
                out.append(Finding("arity", idx, f"{expr.name} takes {want} argument(s), got {n}"))
            for param, arg in zip(sig.params, expr.args):
                is_name = isinstance(arg, Str)
                if (param.kind == "name") != is_name:
                    want = "an object name" if param.kind == "name" else "a numeric value"
                    out.append(Finding("argument_kind", idx,
                                       f"{expr.name}: argument {param.name!r} must be {want}"))
        for a in expr.args:
            if not isinstance(a, Str):
                _walk(a, bound, idx, skills, out)


def static_check(program: Program, robot) -> list[Finding]:
    """Return findings; an empty list means the program is clean for ``robot``."""
    skills = set(robot.skills)
    bound: set[str] = set()
    out: list[Finding] = []
    for idx, stmt in enumerate(program.statements):
        _walk(statement_expr(stmt), bound, idx, skills, out)
        if isinstance(stmt, Binding):
            bound.add(stmt.name)
    return out

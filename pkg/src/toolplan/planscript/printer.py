"""Canonical source formatting with minimal parentheses."""

from __future__ import annotations

from .nodes import BareCall, BinOp, Binding, Call, Comp, Neg, Num, Program, Str, Var, Vec

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG = 3
_POSTFIX = 4


def format_number(node: Num) -> str:
    text = repr(float(node.value))
    return text + (node.unit or "")


def format_expr(e, ctx: int = 0) -> str:
    if isinstance(e, Num):
        return format_number(e)
    if isinstance(e, Str):
        return f"'{e.value}'"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Vec):
        return "[" + ", ".join(format_expr(i) for i in e.items) + "]"
    if isinstance(e, Call):
        return f"{e.name}(" + ", ".join(format_expr(a) for a in e.args) + ")"
    if isinstance(e, Comp):
        return f"{format_expr(e.expr, _POSTFIX)}.{e.axis}"
    if isinstance(e, Neg):
        text = "-" + format_expr(e.expr, _NEG)
        return f"({text})" if ctx > _NEG else text
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        # left-associative: an equal-precedence right operand needs parentheses
        text = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({text})" if p < ctx else text
    raise TypeError(f"not an expression: {e!r}")


def format_statement(s) -> str:
    if isinstance(s, Binding):
        return f"{s.name} = {format_expr(s.expr)}"
    if isinstance(s, BareCall):
        return format_expr(s.call)
    raise TypeError(f"not a statement: {s!r}")


def pretty_print(program: Program) -> str:
    if not program.statements:
        return ""
    return "\n".join(format_statement(s) for s in program.statements) + "\n"

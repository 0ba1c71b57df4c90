"""AST node types.  Source spans are carried but excluded from equality."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

Span = tuple[int, int]


@dataclass(frozen=True)
class Num:
    value: float
    unit: str | None = None
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Str:
    value: str
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Vec:
    items: tuple["Expr", "Expr", "Expr"]
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Comp:
    expr: "Expr"
    axis: str  # x | y | z
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    expr: "Expr"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    span: Span = field(default=(0, 0), compare=False, repr=False)


Expr = Union[Num, Str, Vec, Var, Comp, Neg, BinOp, Call]


@dataclass(frozen=True)
class Binding:
    name: str
    expr: Expr
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BareCall:
    call: Call
    span: Span = field(default=(0, 0), compare=False, repr=False)


Statement = Union[Binding, BareCall]


@dataclass(frozen=True)
class Program:
    statements: tuple[Statement, ...] = ()

    def __len__(self) -> int:
        return len(self.statements)


def iter_calls(expr: Expr):
    """Yield every Call inside ``expr`` in evaluation order (arguments first)."""
    if isinstance(expr, Call):
        for a in expr.args:
            yield from iter_calls(a)
        yield expr
    elif isinstance(expr, Vec):
        for a in expr.items:
            yield from iter_calls(a)
    elif isinstance(expr, BinOp):
        yield from iter_calls(expr.left)
        yield from iter_calls(expr.right)
    elif isinstance(expr, (Neg, Comp)):
        yield from iter_calls(expr.expr)


def statement_expr(stmt: Statement) -> Expr:
    return stmt.expr if isinstance(stmt, Binding) else stmt.call

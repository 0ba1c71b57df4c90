"""The plan-script language: a straight-line, unit-checked skill-call language."""

from .checker import Finding, static_check
from .interpreter import ExecutionTrace, Limits, TraceEntry, interpret
from .lexer import PlanScriptSyntaxError, Token, tokenize
from .nodes import BareCall, BinOp, Binding, Call, Comp, Neg, Num, Program, Str, Var, Vec
from .parser import GRAMMAR, parse, parse_source
from .printer import pretty_print
from .signatures import MOTION_SKILLS, QUERY_SKILLS, SIGNATURES, SKILL_DOCS
from .values import Name, NoValue, PlanScriptRuntimeError, Scalar, SkillCallError, Vector

__all__ = [
    "BareCall", "BinOp", "GRAMMAR", "SKILL_DOCS", "Binding", "Call", "Comp", "ExecutionTrace", "Finding", "Limits",
    "MOTION_SKILLS", "Name", "Neg", "NoValue", "Num", "PlanScriptRuntimeError",
    "PlanScriptSyntaxError", "Program", "QUERY_SKILLS", "SIGNATURES", "Scalar", "SkillCallError",
    "Str", "Token", "TraceEntry", "Var", "Vec", "Vector", "interpret", "parse", "parse_source",
    "pretty_print", "static_check", "tokenize",
]

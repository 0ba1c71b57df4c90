"""Runtime values and unit algebra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PlanScriptRuntimeError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


class SkillCallError(Exception):
    """Base for errors raised by an environment while executing a skill."""

    kind = "skill_error"

    def values(self) -> dict:
        return {}


@dataclass(frozen=True)
class Scalar:
    value: float
    unit: str | None = None

    def to_json(self):
        return {"scalar": self.value, "unit": self.unit}


@dataclass(frozen=True, eq=False)
class Vector:
    values: np.ndarray
    unit: str | None = None

    def __eq__(self, other):
        return (isinstance(other, Vector) and self.unit == other.unit
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((tuple(self.values.tolist()), self.unit))

    def to_json(self):
        return {"vector": [float(v) for v in self.values], "unit": self.unit}


@dataclass(frozen=True)
class Name:
    value: str

    def to_json(self):
        return {"name": self.value}


@dataclass(frozen=True)
class NoValue:
    def to_json(self):
        return None


NONE = NoValue()
Value = Scalar | Vector | Name | NoValue


def value_from_json(d):
    if d is None:
        return NONE
    if "scalar" in d:
        return Scalar(float(d["scalar"]), d.get("unit"))
    if "vector" in d:
        return Vector(np.array(d["vector"], dtype=float), d.get("unit"))
    if "name" in d:
        return Name(d["name"])
    raise ValueError(f"not a value: {d!r}")


def _type_error(msg: str):
    raise PlanScriptRuntimeError("type_error", msg)


def unify(a: str | None, b: str | None, op: str) -> str | None:
    if a == b:
        return a
    if a is None:
        return b
    if b is None:
        return a
    _type_error(f"cannot {op} quantities in {a} and {b}")


def _mul_unit(a, b):
    if a is not None and b is not None:
        _type_error(f"cannot multiply {a} by {b}")
    return a if a is not None else b


def _div_unit(a, b):
    if b is None:
        return a
    if a == b:
        return None
    _type_error(f"cannot divide {a or 'a plain number'} by {b}")


def _numeric(v, op):
    if isinstance(v, (Scalar, Vector)):
        return v
    _type_error(f"operand of {op!r} must be numeric")


def binary(op: str, left, right):
    left, right = _numeric(left, op), _numeric(right, op)
    if op in "+-":
        verb = "add" if op == "+" else "subtract"
        if type(left) is not type(right):
            _type_error(f"cannot {verb} a vector and a scalar")
        unit = unify(left.unit, right.unit, verb)
        if isinstance(left, Scalar):
            val = left.value + right.value if op == "+" else left.value - right.value
            return Scalar(val, unit)
        val = left.values + right.values if op == "+" else left.values - right.values
        return Vector(val, unit)
    if op == "*":
        if isinstance(left, Vector) and isinstance(right, Vector):
            _type_error("cannot multiply two vectors")
        unit = _mul_unit(left.unit, right.unit)
        if isinstance(left, Scalar) and isinstance(right, Scalar):
            return Scalar(left.value * right.value, unit)
        vec, sc = (left, right) if isinstance(left, Vector) else (right, left)
        return Vector(vec.values * sc.value, unit)
    if op == "/":
        if isinstance(right, Vector):
            _type_error("cannot divide by a vector")
        unit = _div_unit(left.unit, right.unit)
        if right.value == 0.0:
            raise PlanScriptRuntimeError("division_by_zero", "division by zero")
        if isinstance(left, Scalar):
            return Scalar(left.value / right.value, unit)
        return Vector(left.values / right.value, unit)
    raise ValueError(op)


def negate(v):
    v = _numeric(v, "-")
    if isinstance(v, Scalar):
        return Scalar(-v.value, v.unit)
    return Vector(-v.values, v.unit)


def component(v, axis: str):
    if not isinstance(v, Vector):
        _type_error(f"component .{axis} requires a vector")
    return Scalar(float(v.values["xyz".index(axis)]), v.unit)


def make_vector(items) -> Vector:
    unit = None
    vals = []
    for it in items:
        if not isinstance(it, Scalar):
            _type_error("vector elements must be scalars")
        unit = unify(unit, it.unit, "combine")
        vals.append(it.value)
    return Vector(np.array(vals, dtype=float), unit)

"""Tokenizer for plan scripts."""

from __future__ import annotations

import math
from dataclasses import dataclass

UNITS = ("m", "kg", "rad")
PUNCT = set("=+-*/()[],.")
NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_- .")
_DIGITS = set("0123456789")
_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHARS = _IDENT_START | _DIGITS


class PlanScriptSyntaxError(ValueError):
    """A located lexing or parsing failure."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | op | newline
    text: str
    line: int
    col: int
    value: float | str | None = None
    unit: str | None = None


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens; comments run from ``#`` to end of line.

    Newline tokens separate statements and are emitted only after a
    non-empty line.
    """
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            if tokens and tokens[-1].kind != "newline":
                tokens.append(Token("newline", "\n", line, col))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch in _DIGITS or (ch == "." and i + 1 < n and source[i + 1] in _DIGITS):
            j = i
            while j < n and source[j] in _DIGITS:
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1] in _DIGITS:
                j += 1
                while j < n and source[j] in _DIGITS:
                    j += 1
            elif j < n and source[j] == "." and not (j + 1 < n and source[j + 1] in _IDENT_START):
                # trailing dot as in "3."
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k] in _DIGITS:
                    while k < n and source[k] in _DIGITS:
                        k += 1
                    j = k
            text = source[i:j]
            value = float(text)
            if not math.isfinite(value):
                raise PlanScriptSyntaxError(f"number out of range {text!r}", line, start_col)
            unit = None
            if j < n and source[j] in _IDENT_START:
                k = j
                while k < n and source[k] in _IDENT_CHARS:
                    k += 1
                suffix = source[j:k]
                if suffix not in UNITS:
                    raise PlanScriptSyntaxError(f"invalid unit suffix {suffix!r}", line, col + (j - i))
                unit = suffix
                j = k
            tokens.append(Token("number", source[i:j], line, start_col, value, unit))
            col += j - i
            i = j
            continue
        if ch in _IDENT_START:
            j = i
            while j < n and source[j] in _IDENT_CHARS:
                j += 1
            tokens.append(Token("ident", source[i:j], line, start_col, source[i:j]))
            col += j - i
            i = j
            continue
        if ch == "'":
            j = i + 1
            while j < n and source[j] != "'":
                if source[j] == "\n":
                    raise PlanScriptSyntaxError("unterminated string", line, start_col)
                if source[j] not in NAME_CHARS:
                    raise PlanScriptSyntaxError(
                        f"illegal character {source[j]!r} in object name", line, col + (j - i))
                j += 1
            if j >= n:
                raise PlanScriptSyntaxError("unterminated string", line, start_col)
            text = source[i:j + 1]
            tokens.append(Token("string", text, line, start_col, source[i + 1:j]))
            col += j + 1 - i
            i = j + 1
            continue
        if ch in PUNCT:
            tokens.append(Token("op", ch, line, start_col))
            i += 1
            col += 1
            continue
        raise PlanScriptSyntaxError(f"illegal character {ch!r}", line, col)
    return tokens

"""Recursive-descent parser.

Grammar (see docs/grammar.md for the EBNF)::

    program   = { statement NEWLINE }
    statement = IDENT "=" expr | call
    expr      = term { ("+" | "-") term }
    term      = unary { ("*" | "/") unary }
    unary     = "-" unary | postfix
    postfix   = primary { "." ("x" | "y" | "z") }
    primary   = NUMBER | vector | call | IDENT | "(" expr ")"
    vector    = "[" expr "," expr "," expr "]"
    call      = IDENT "(" [ arg { "," arg } ] ")"
    arg       = STRING | expr
"""

from __future__ import annotations

from .lexer import PlanScriptSyntaxError, Token, tokenize
from .nodes import BareCall, BinOp, Binding, Call, Comp, Neg, Num, Program, Str, Var, Vec

GRAMMAR = """\
program   = { statement NEWLINE }
statement = IDENT "=" expr | call
expr      = term { ("+" | "-") term }
term      = unary { ("*" | "/") unary }
unary     = "-" unary | postfix
postfix   = primary { "." ("x" | "y" | "z") }
primary   = NUMBER | vector | call | IDENT | "(" expr ")"
vector    = "[" expr "," expr "," expr "]"
call      = IDENT "(" [ arg { "," arg } ] ")"
arg       = STRING | expr
NUMBER    = ( digits [ "." [ digits ] ] | "." digits ) [ exponent ] [ "m" | "kg" | "rad" ]
STRING    = "'" object-name "'"
Comments run from "#" to the end of the line.
"""

MAX_DEPTH = 64


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # -- helpers
    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def _where(self) -> tuple[int, int]:
        tok = self.peek()
        if tok is not None:
            return tok.line, tok.col
        if self.tokens:
            last = self.tokens[-1]
            return last.line, last.col + len(last.text)
        return 1, 1

    def error(self, message: str):
        line, col = self._where()
        tok = self.peek()
        found = "end of input" if tok is None else ("newline" if tok.kind == "newline" else repr(tok.text))
        raise PlanScriptSyntaxError(f"{message}, found {found}", line, col)

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "op" and tok.text == text

    def expect_op(self, text: str) -> Token:
        if not self.at_op(text):
            self.error(f"expected {text!r}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.error("expression nested too deeply")

    # -- grammar
    def program(self) -> Program:
        stmts = []
        while self.peek() is not None:
            if self.peek().kind == "newline":
                self.pos += 1
                continue
            stmts.append(self.statement())
            tok = self.peek()
            if tok is not None:
                if tok.kind != "newline":
                    self.error("expected end of statement")
                self.pos += 1
        return Program(tuple(stmts))

    def statement(self):
        tok = self.peek()
        nxt = self.peek(1)
        if tok.kind == "ident" and nxt is not None and nxt.kind == "op" and nxt.text == "=":
            self.pos += 2
            expr = self.expr()
            return Binding(tok.text, expr, span=(tok.line, tok.col))
        expr = self.expr()
        if not isinstance(expr, Call):
            line, col = expr.span
            raise PlanScriptSyntaxError("expected a skill call or an assignment", line, col)
        return BareCall(expr, span=expr.span)

    def expr(self):
        self._enter()
        left = self.term()
        while self.at_op("+") or self.at_op("-"):
            op = self.tokens[self.pos]
            self.pos += 1
            right = self.term()
            left = BinOp(op.text, left, right, span=(op.line, op.col))
        self.depth -= 1
        return left

    def term(self):
        left = self.unary()
        while self.at_op("*") or self.at_op("/"):
            op = self.tokens[self.pos]
            self.pos += 1
            right = self.unary()
            left = BinOp(op.text, left, right, span=(op.line, op.col))
        return left

    def unary(self):
        if self.at_op("-"):
            op = self.tokens[self.pos]
            self.pos += 1
            self._enter()
            inner = self.unary()
            self.depth -= 1
            return Neg(inner, span=(op.line, op.col))
        return self.postfix()

    def postfix(self):
        node = self.primary()
        while self.at_op("."):
            dot = self.tokens[self.pos]
            self.pos += 1
            tok = self.peek()
            if tok is None or tok.kind != "ident" or tok.text not in ("x", "y", "z"):
                self.error("expected component name x, y or z after '.'")
            self.pos += 1
            node = Comp(node, tok.text, span=(dot.line, dot.col))
        return node

    def primary(self):
        tok = self.peek()
        if tok is None or tok.kind == "newline":
            self.error("expected an expression")
        if tok.kind == "number":
            self.pos += 1
            return Num(float(tok.value), tok.unit, span=(tok.line, tok.col))
        if tok.kind == "string":
            self.error("object-name strings are only allowed as skill arguments")
        if tok.kind == "ident":
            self.pos += 1
            if self.at_op("("):
                return self.call_rest(tok)
            return Var(tok.text, span=(tok.line, tok.col))
        if self.at_op("["):
            self.pos += 1
            items = [self.expr()]
            for _ in range(2):
                self.expect_op(",")
                items.append(self.expr())
            self.expect_op("]")
            return Vec(tuple(items), span=(tok.line, tok.col))
        if self.at_op("("):
            self.pos += 1
            inner = self.expr()
            self.expect_op(")")
            return inner
        self.error("expected an expression")

    def call_rest(self, name_tok: Token) -> Call:
        self.expect_op("(")
        args = []
        if not self.at_op(")"):
            args.append(self.arg())
            while self.at_op(","):
                self.pos += 1
                args.append(self.arg())
        self.expect_op(")")
        return Call(name_tok.text, tuple(args), span=(name_tok.line, name_tok.col))

    def arg(self):
        tok = self.peek()
        if tok is not None and tok.kind == "string":
            self.pos += 1
            return Str(tok.value, span=(tok.line, tok.col))
        return self.expr()


def parse(tokens: list[Token]) -> Program:
    return _Parser(tokens).program()


def parse_source(source: str) -> Program:
    return parse(tokenize(source))

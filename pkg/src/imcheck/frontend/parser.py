"""Recursive-descent parser and type checker for MiniC."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    Assert,
    Assign,
    AssignNondet,
    Assume,
    BinOp,
    Block,
    BoolOp,
    Compare,
    ErrorLabel,
    If,
    IntLit,
    LogicalNot,
    Name,
    NondetCond,
    Program,
    Return,
    UnaryMinus,
    While,
)

KEYWORDS = {"int", "if", "else", "while", "assert", "assume", "ERROR", "return", "nondet"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){};:])
    """,
    re.VERBOSE | re.DOTALL,
)


class MiniCError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class MiniCSyntaxError(MiniCError):
    def __init__(self, message: str, line: int, col: int, expected: tuple = ()):
        super().__init__(message, line, col)
        self.expected = expected


class MiniCTypeError(MiniCError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise MiniCSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind, text = m.lastgroup, m.group()
        if kind in ("int", "ident", "op"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    if source.startswith("/*", pos):
        raise MiniCSyntaxError("unterminated comment", line, pos - line_start + 1)
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# expression kinds produced while parsing
_INT, _BOOL, _NONDET = "int", "bool", "nondet"


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.declared: list[str] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}", (text,))
        return self.advance()

    def fail(self, msg: str, expected: tuple = ()):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise MiniCSyntaxError(f"{msg}, found {found}", t.line, t.col, expected)

    def type_error(self, msg: str, tok: Token):
        raise MiniCTypeError(msg, tok.line, tok.col)

    # program structure

    def program(self) -> Program:
        while self.at("int"):
            self.advance()
            t = self.tok
            if t.kind != "ident":
                self.fail("expected identifier", ("identifier",))
            self.advance()
            if t.text.startswith("__"):
                self.type_error(f"identifier {t.text!r} is reserved", t)
            if t.text in self.declared:
                self.type_error(f"variable {t.text!r} declared twice", t)
            self.declared.append(t.text)
            self.expect(";")
        body = []
        while self.tok.kind != "eof":
            if self.at("int"):
                self.type_error("declarations must precede statements", self.tok)
            body.append(self.statement())
        return Program(tuple(self.declared), tuple(body))

    def statement(self):
        t = self.tok
        if t.kind == "ident":
            return self.assignment()
        if self.at("if"):
            self.advance()
            cond = self.paren_cond()
            then = self.body()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.body()
            return If(cond, then, orelse)
        if self.at("while"):
            self.advance()
            cond = self.paren_cond()
            return While(cond, self.body())
        if self.at("assert", "assume"):
            kw = self.advance().text
            cond = self.paren_cond()
            self.expect(";")
            return Assert(cond) if kw == "assert" else Assume(cond)
        if self.at("ERROR"):
            self.advance()
            self.expect(":")
            return ErrorLabel(self.statement())
        if self.at("return"):
            self.advance()
            self.expect(";")
            return Return()
        if self.at("{"):
            return self.block()
        self.fail("expected statement", ("identifier", "if", "while", "assert", "assume", "ERROR", "return", "{"))

    def block(self) -> Block:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}'", ("}",))
            stmts.append(self.statement())
        self.advance()
        return Block(tuple(stmts))

    def body(self) -> Block:
        s = self.statement()
        return s if isinstance(s, Block) else Block((s,))

    def assignment(self):
        t = self.advance()
        self.check_declared(t)
        self.expect("=")
        if self.at("nondet"):
            save = self.i
            self.advance()
            self.expect("(")
            self.expect(")")
            if self.at(";"):
                self.advance()
                return AssignNondet(t.text)
            self.i = save
        start = self.tok
        value, kind = self.expr()
        if kind != _INT:
            self.type_error("right-hand side of an assignment must be an integer expression", start)
        self.expect(";")
        return Assign(t.text, value)

    def check_declared(self, t: Token) -> None:
        if t.text not in self.declared:
            self.type_error(f"undeclared variable {t.text!r}", t)

    def paren_cond(self):
        self.expect("(")
        start = self.tok
        node, kind = self.expr()
        self.expect(")")
        return self.as_cond(node, kind, start)

    def as_cond(self, node, kind, tok):
        if kind == _NONDET:
            return NondetCond()
        if kind != _BOOL:
            self.type_error("condition must be boolean (compare the integer explicitly)", tok)
        return node

    def as_int(self, node, kind, tok):
        if kind == _NONDET:
            self.type_error("nondet() is only allowed as a full assignment right-hand side or a condition", tok)
        if kind != _INT:
            self.type_error("expected an integer expression", tok)
        return node

    # expressions, lowest precedence first

    def expr(self):
        return self.disjunction()

    def disjunction(self):
        start = self.tok
        node, kind = self.conjunction()
        while self.at("||"):
            self.advance()
            rtok = self.tok
            rhs, rkind = self.conjunction()
            node = BoolOp("||", self.as_cond(node, kind, start), self.as_cond(rhs, rkind, rtok))
            kind = _BOOL
        return node, kind

    def conjunction(self):
        start = self.tok
        node, kind = self.negation()
        while self.at("&&"):
            self.advance()
            rtok = self.tok
            rhs, rkind = self.negation()
            node = BoolOp("&&", self.as_cond(node, kind, start), self.as_cond(rhs, rkind, rtok))
            kind = _BOOL
        return node, kind

    def negation(self):
        if self.at("!"):
            self.advance()
            tok = self.tok
            node, kind = self.negation()
            return LogicalNot(self.as_cond(node, kind, tok)), _BOOL
        return self.comparison()

    def comparison(self):
        start = self.tok
        node, kind = self.additive()
        if self.at("==", "!=", "<", "<=", ">", ">="):
            op = self.advance().text
            rtok = self.tok
            rhs, rkind = self.additive()
            node = Compare(op, self.as_int(node, kind, start), self.as_int(rhs, rkind, rtok))
            kind = _BOOL
            if self.at("==", "!=", "<", "<=", ">", ">="):
                self.fail("comparisons do not chain; add parentheses")
        return node, kind

    def additive(self):
        start = self.tok
        node, kind = self.multiplicative()
        while self.at("+", "-"):
            op = self.advance().text
            rtok = self.tok
            rhs, rkind = self.multiplicative()
            node = BinOp(op, self.as_int(node, kind, start), self.as_int(rhs, rkind, rtok))
            kind = _INT
        return node, kind

    def multiplicative(self):
        start = self.tok
        node, kind = self.unary()
        while self.at("*", "/", "%"):
            optok = self.advance()
            rtok = self.tok
            rhs, rkind = self.unary()
            lhs = self.as_int(node, kind, start)
            rhs = self.as_int(rhs, rkind, rtok)
            if optok.text == "*":
                if not (_literal(lhs) or _literal(rhs)):
                    self.type_error("multiplication requires a constant operand", optok)
            elif not (isinstance(rhs, IntLit) and rhs.value > 0):
                self.type_error(f"'{optok.text}' requires a positive integer literal divisor", rtok)
            node, kind = BinOp(optok.text, lhs, rhs), _INT
        return node, kind

    def unary(self):
        if self.at("-"):
            self.advance()
            tok = self.tok
            node, kind = self.unary()
            return UnaryMinus(self.as_int(node, kind, tok)), _INT
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text)), _INT
        if t.kind == "ident":
            self.advance()
            self.check_declared(t)
            return Name(t.text), _INT
        if self.at("nondet"):
            self.advance()
            self.expect("(")
            self.expect(")")
            return None, _NONDET
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail("expected expression", ("integer", "identifier", "nondet", "(", "-", "!"))


def _literal(e) -> bool:
    return isinstance(e, IntLit) or (isinstance(e, UnaryMinus) and _literal(e.arg))


def parse(source: str) -> Program:
    """Parse and type-check MiniC source text."""
    return _Parser(source).program()

"""Minimal S-expression reader for SMT-LIB 2 text."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class SExprError(ValueError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Keyword:
    name: str

    def __str__(self) -> str:
        return ":" + self.name


@dataclass(frozen=True)
class String:
    value: str

    def __str__(self) -> str:
        return '"' + self.value.replace('"', '""') + '"'


SExpr = Union[int, Symbol, Keyword, String, list]


def _tokens(text: str) -> Iterator[str]:
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == '"':
            j = i + 1
            while True:
                if j >= n:
                    raise SExprError("unterminated string literal")
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            yield text[i : j + 1]
            i = j + 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SExprError("unterminated quoted symbol")
            yield text[i : j + 1]
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '();"|':
                j += 1
            yield text[i:j]
            i = j


def _atom(tok: str) -> SExpr:
    if tok.startswith('"'):
        return String(tok[1:-1].replace('""', '"'))
    if tok.startswith("|"):
        return Symbol(tok[1:-1])
    if tok.startswith(":"):
        return Keyword(tok[1:])
    if tok.isdigit():
        return int(tok)
    return Symbol(tok)


def parse_all(text: str) -> list[SExpr]:
    """Parse every top-level S-expression in ``text``."""
    stack: list[list] = [[]]
    for tok in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SExprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(_atom(tok))
    if len(stack) != 1:
        raise SExprError("unbalanced '('")
    return stack[0]


def parse_one(text: str) -> SExpr:
    items = parse_all(text)
    if len(items) != 1:
        raise SExprError(f"expected one expression, got {len(items)}")
    return items[0]


def is_complete(text: str) -> bool:
    """True when ``text`` holds at least one balanced top-level expression."""
    depth = 0
    seen = False
    try:
        for tok in _tokens(text):
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
                if depth == 0:
                    seen = True
            elif depth == 0:
                seen = True
    except SExprError:
        return False
    return seen and depth == 0


def dumps(e: SExpr) -> str:
    if isinstance(e, list):
        return "(" + " ".join(dumps(x) for x in e) + ")"
    return str(e)

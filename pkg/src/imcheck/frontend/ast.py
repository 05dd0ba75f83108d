"""MiniC abstract syntax tree and pretty-printer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


# integer expressions

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / %
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class UnaryMinus:
    arg: "Expr"


# boolean conditions

@dataclass(frozen=True)
class Compare:
    op: str  # one of == != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str  # && or ||
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class LogicalNot:
    arg: "Cond"


@dataclass(frozen=True)
class NondetCond:
    """A bare ``nondet()`` used as a condition: true iff the fresh value is nonzero."""


Expr = Union[IntLit, Name, BinOp, UnaryMinus]
Cond = Union[Compare, BoolOp, LogicalNot, NondetCond]


# statements

@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr


@dataclass(frozen=True)
class AssignNondet:
    target: str


# The parser always wraps if/while bodies in a Block, so printing them
# braced round-trips exactly.
@dataclass(frozen=True)
class If:
    cond: Cond
    then: "Stmt"
    orelse: "Stmt | None" = None


@dataclass(frozen=True)
class While:
    cond: Cond
    body: "Stmt"


@dataclass(frozen=True)
class Assert:
    cond: Cond


@dataclass(frozen=True)
class Assume:
    cond: Cond


@dataclass(frozen=True)
class ErrorLabel:
    stmt: "Stmt"


@dataclass(frozen=True)
class Return:
    pass


@dataclass(frozen=True)
class Block:
    stmts: tuple


Stmt = Union[Assign, AssignNondet, If, While, Assert, Assume, ErrorLabel, Return, Block]


@dataclass(frozen=True)
class Program:
    decls: tuple
    body: tuple


def walk(node):
    """Yield every AST node below and including ``node``, depth first."""
    yield node
    if isinstance(node, Program):
        for s in node.body:
            yield from walk(s)
    elif isinstance(node, (BinOp, Compare, BoolOp)):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, (UnaryMinus, LogicalNot)):
        yield from walk(node.arg)
    elif isinstance(node, Assign):
        yield from walk(node.value)
    elif isinstance(node, If):
        yield from walk(node.cond)
        yield from walk(node.then)
        if node.orelse is not None:
            yield from walk(node.orelse)
    elif isinstance(node, While):
        yield from walk(node.cond)
        yield from walk(node.body)
    elif isinstance(node, (Assert, Assume)):
        yield from walk(node.cond)
    elif isinstance(node, ErrorLabel):
        yield from walk(node.stmt)
    elif isinstance(node, Block):
        for s in node.stmts:
            yield from walk(s)


def count_nondet(node) -> int:
    return sum(isinstance(n, (NondetCond, AssignNondet)) for n in walk(node))


def unparse_expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, UnaryMinus):
        return f"-{unparse_expr(e.arg)}"
    if isinstance(e, (BinOp, Compare)):
        return f"({unparse_expr(e.left)} {e.op} {unparse_expr(e.right)})"
    if isinstance(e, BoolOp):
        return f"({unparse_expr(e.left)} {e.op} {unparse_expr(e.right)})"
    if isinstance(e, LogicalNot):
        return f"!{unparse_expr(e.arg)}"
    if isinstance(e, NondetCond):
        return "nondet()"
    raise TypeError(f"not an expression: {e!r}")


def _unparse_stmt(s, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(s, Assign):
        out.append(f"{pad}{s.target} = {unparse_expr(s.value)};")
    elif isinstance(s, AssignNondet):
        out.append(f"{pad}{s.target} = nondet();")
    elif isinstance(s, If):
        out.append(f"{pad}if ({unparse_expr(s.cond)})")
        _unparse_stmt(s.then, indent, out)
        if s.orelse is not None:
            out.append(f"{pad}else")
            _unparse_stmt(s.orelse, indent, out)
    elif isinstance(s, While):
        out.append(f"{pad}while ({unparse_expr(s.cond)})")
        _unparse_stmt(s.body, indent, out)
    elif isinstance(s, Assert):
        out.append(f"{pad}assert({unparse_expr(s.cond)});")
    elif isinstance(s, Assume):
        out.append(f"{pad}assume({unparse_expr(s.cond)});")
    elif isinstance(s, ErrorLabel):
        out.append(f"{pad}ERROR:")
        _unparse_stmt(s.stmt, indent + 1, out)
    elif isinstance(s, Return):
        out.append(f"{pad}return;")
    elif isinstance(s, Block):
        out.append(f"{pad}{{")
        for inner in s.stmts:
            _unparse_stmt(inner, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def unparse(program: Program) -> str:
    out = [f"int {d};" for d in program.decls]
    for s in program.body:
        _unparse_stmt(s, 0, out)
    return "\n".join(out) + "\n"

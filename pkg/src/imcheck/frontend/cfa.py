"""Control-flow automaton construction from the MiniC AST."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

from .ast import (
    Assert,
    Assign,
    AssignNondet,
    Assume,
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
    While,
    walk,
)

TRUE_COND = Compare("==", IntLit(0), IntLit(0))


class NoErrorLocation(Exception):
    """The program has no error label and no assert: the task is vacuously safe."""


@dataclass(frozen=True)
class AssumeOp:
    cond: object

    def __str__(self) -> str:
        from .ast import unparse_expr

        return f"[{unparse_expr(self.cond)}]"


@dataclass(frozen=True)
class AssignOp:
    var: str
    expr: object

    def __str__(self) -> str:
        from .ast import unparse_expr

        return f"{self.var} = {unparse_expr(self.expr)}"


@dataclass(frozen=True)
class HavocOp:
    var: str

    def __str__(self) -> str:
        return f"{self.var} = nondet()"


Operation = Union[AssumeOp, AssignOp, HavocOp]


@dataclass(frozen=True)
class Edge:
    source: int
    op: Operation
    target: int


@dataclass
class Cfa:
    locations: set
    edges: list
    initial: int
    errors: set
    variables: tuple = ()
    exit: int | None = None

    def out_edges(self, loc: int) -> list[Edge]:
        return [e for e in self.edges if e.source == loc]

    def in_edges(self, loc: int) -> list[Edge]:
        return [e for e in self.edges if e.target == loc]

    def successors(self) -> dict[int, list[Edge]]:
        out: dict[int, list[Edge]] = {loc: [] for loc in self.locations}
        for e in self.edges:
            out[e.source].append(e)
        return out

    def check(self) -> None:
        for e in self.edges:
            assert e.source in self.locations and e.target in self.locations, e
        assert not self.in_edges(self.initial), "initial location has an incoming edge"
        assert self.errors <= self.locations
        assert reachable(self) == self.locations, "unreachable locations survived pruning"


def reachable(cfa: Cfa, start: int | None = None) -> set:
    succ = cfa.successors()
    seen = {cfa.initial if start is None else start}
    stack = list(seen)
    while stack:
        for e in succ[stack.pop()]:
            if e.target not in seen:
                seen.add(e.target)
                stack.append(e.target)
    return seen


_FLIP = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def negate(cond):
    if isinstance(cond, Compare):
        return Compare(_FLIP[cond.op], cond.left, cond.right)
    if isinstance(cond, LogicalNot):
        return cond.arg
    return LogicalNot(cond)


def cond_vars(cond) -> set:
    return {n.ident for n in walk(cond) if isinstance(n, Name)}


def op_uses(op: Operation) -> set:
    if isinstance(op, AssumeOp):
        return cond_vars(op.cond)
    if isinstance(op, AssignOp):
        return {n.ident for n in walk(op.expr) if isinstance(n, Name)}
    return set()


def op_defs(op: Operation) -> set:
    if isinstance(op, (AssignOp, HavocOp)):
        return {op.var}
    return set()


class _Builder:
    def __init__(self):
        self._ids = itertools.count()
        self.locations: set = set()
        self.edges: list[Edge] = []
        self.errors: set = set()
        self.temps: list[str] = []
        self.initial = self.new()
        self.exit = self.new()

    def new(self) -> int:
        loc = next(self._ids)
        self.locations.add(loc)
        return loc

    def edge(self, src: int, op: Operation, dst: int) -> None:
        self.edges.append(Edge(src, op, dst))

    def is_plain(self, loc: int) -> bool:
        # A location can be merged into another only if nothing hangs off it yet.
        return (
            loc not in (self.initial, self.exit)
            and loc not in self.errors
            and not any(e.source == loc for e in self.edges)
        )

    def merge(self, keep: int, drop: int) -> None:
        self.edges = [
            Edge(keep if e.source == drop else e.source, e.op, keep if e.target == drop else e.target)
            for e in self.edges
        ]
        self.locations.discard(drop)

    def join(self, a: int | None, b: int | None) -> int | None:
        if a is None:
            return b
        if b is None or a == b:
            return a
        if self.is_plain(b):
            self.merge(a, b)
            return a
        if self.is_plain(a):
            self.merge(b, a)
            return b
        j = self.new()
        self.edge(a, AssumeOp(TRUE_COND), j)
        self.edge(b, AssumeOp(TRUE_COND), j)
        return j

    def desugar_nondet(self, cond, cur: int):
        """Replace each bare nondet() by a fresh havoced temporary."""
        if isinstance(cond, NondetCond):
            tmp = f"__nd{len(self.temps)}"
            self.temps.append(tmp)
            nxt = self.new()
            self.edge(cur, HavocOp(tmp), nxt)
            return Compare("!=", Name(tmp), IntLit(0)), nxt
        if isinstance(cond, BoolOp):
            left, cur = self.desugar_nondet(cond.left, cur)
            right, cur = self.desugar_nondet(cond.right, cur)
            return BoolOp(cond.op, left, right), cur
        if isinstance(cond, LogicalNot):
            inner, cur = self.desugar_nondet(cond.arg, cur)
            return LogicalNot(inner), cur
        return cond, cur

    def fresh_entry(self, cur: int) -> int:
        """A location without incoming edges from elsewhere cannot be a loop head."""
        if cur == self.initial:
            nxt = self.new()
            self.edge(cur, AssumeOp(TRUE_COND), nxt)
            return nxt
        return cur

    def stmt(self, s, cur: int) -> int | None:
        if isinstance(s, Assign):
            nxt = self.new()
            self.edge(cur, AssignOp(s.target, s.value), nxt)
            return nxt
        if isinstance(s, AssignNondet):
            nxt = self.new()
            self.edge(cur, HavocOp(s.target), nxt)
            return nxt
        if isinstance(s, Block):
            for inner in s.stmts:
                if cur is None:
                    break
                cur = self.stmt(inner, cur)
            return cur
        if isinstance(s, If):
            cond, cur = self.desugar_nondet(s.cond, cur)
            t_entry, e_entry = self.new(), self.new()
            self.edge(cur, AssumeOp(cond), t_entry)
            self.edge(cur, AssumeOp(negate(cond)), e_entry)
            t_exit = self.stmt(s.then, t_entry)
            e_exit = self.stmt(s.orelse, e_entry) if s.orelse is not None else e_entry
            return self.join(t_exit, e_exit)
        if isinstance(s, While):
            head = self.fresh_entry(cur)
            if not self.is_plain(head):
                nxt = self.new()
                self.edge(head, AssumeOp(TRUE_COND), nxt)
                head = nxt
            cond, test = self.desugar_nondet(s.cond, head)
            body_entry, exit_ = self.new(), self.new()
            self.edge(test, AssumeOp(cond), body_entry)
            self.edge(test, AssumeOp(negate(cond)), exit_)
            body_exit = self.stmt(s.body, body_entry)
            if body_exit is not None:
                if self.is_plain(body_exit) and body_exit != body_entry:
                    self.merge(head, body_exit)
                else:
                    self.edge(body_exit, AssumeOp(TRUE_COND), head)
            return exit_
        if isinstance(s, Assert):
            cond, cur = self.desugar_nondet(s.cond, cur)
            err, ok = self.new(), self.new()
            self.errors.add(err)
            self.edge(cur, AssumeOp(negate(cond)), err)
            self.edge(cur, AssumeOp(cond), ok)
            return ok
        if isinstance(s, Assume):
            cond, cur = self.desugar_nondet(s.cond, cur)
            nxt = self.new()
            self.edge(cur, AssumeOp(cond), nxt)
            return nxt
        if isinstance(s, ErrorLabel):
            if self.is_plain(cur):
                err = cur
            else:
                err = self.new()
                self.edge(cur, AssumeOp(TRUE_COND), err)
            self.errors.add(err)
            return self.stmt(s.stmt, err)
        if isinstance(s, Return):
            self.edge(cur, AssumeOp(TRUE_COND), self.exit)
            return None
        raise TypeError(f"unknown statement {s!r}")


def build_cfa(program: Program) -> Cfa:
    """Build the CFA of ``program``; raises NoErrorLocation if it has none."""
    b = _Builder()
    end = b.stmt(Block(program.body), b.initial)
    if end is not None:
        if b.is_plain(end):
            b.merge(b.exit, end)
        else:
            b.edge(end, AssumeOp(TRUE_COND), b.exit)
    if not b.errors:
        raise NoErrorLocation("program contains no ERROR label and no assert")
    cfa = Cfa(b.locations, b.edges, b.initial, set(b.errors), tuple(program.decls) + tuple(b.temps), b.exit)
    cfa = prune(cfa)
    return cfa


def prune(cfa: Cfa) -> Cfa:
    keep = reachable(cfa)
    edges = [e for e in cfa.edges if e.source in keep]
    exit_ = cfa.exit if cfa.exit in keep else None
    return Cfa(keep, edges, cfa.initial, cfa.errors & keep, cfa.variables, exit_)


def renumber(cfa: Cfa) -> Cfa:
    """Relabel locations 0..n-1 in breadth-first order from the initial location."""
    order = [cfa.initial]
    succ = cfa.successors()
    seen = {cfa.initial}
    i = 0
    while i < len(order):
        for e in succ[order[i]]:
            if e.target not in seen:
                seen.add(e.target)
                order.append(e.target)
        i += 1
    m = {old: new for new, old in enumerate(order)}
    return Cfa(
        set(m.values()),
        [Edge(m[e.source], e.op, m[e.target]) for e in cfa.edges],
        m[cfa.initial],
        {m[x] for x in cfa.errors},
        cfa.variables,
        m.get(cfa.exit) if cfa.exit is not None else None,
    )


def all_vars(cfa: Cfa) -> tuple:
    names = set(cfa.variables)
    for e in cfa.edges:
        names |= op_uses(e.op) | op_defs(e.op)
    return tuple(sorted(names))


def format_cfa(cfa: Cfa) -> str:
    lines = [f"initial: {cfa.initial}", f"errors: {sorted(cfa.errors)}"]
    for e in sorted(cfa.edges, key=lambda e: (e.source, e.target)):
        lines.append(f"  {e.source} -> {e.target}: {e.op}")
    return "\n".join(lines)

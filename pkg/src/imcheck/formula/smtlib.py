"""SMT-LIB 2 serialization of formulas and parsing of solver-produced terms.

Variables are rendered ``name!index``; this naming is relied on by the
model and interpolant parsers.
"""

from __future__ import annotations

import re
from typing import Iterable

from .sexpr import SExpr, SExprError, Symbol, parse_one
from .terms import (
    FALSE,
    TRUE,
    Add,
    And,
    BoolConst,
    Cmp,
    Div,
    Exists,
    Iff,
    Implies,
    IntConst,
    Ite,
    Mod,
    Mul,
    Neg,
    Node,
    Not,
    Or,
    Sub,
    Var,
    conj,
    disj,
    is_formula,
    neg,
)

_VAR_RE = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)!(?P<index>\d+)$")


class UnsupportedInterpolant(ValueError):
    """Solver output outside the quantifier-free linear integer fragment."""


def _int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def to_smtlib(n: Node) -> str:
    parts: list[str] = []
    _emit(n, parts)
    return "".join(parts)


def _emit(n: Node, out: list[str]) -> None:
    if isinstance(n, Var):
        out.append(f"{n.name}!{n.index}")
    elif isinstance(n, IntConst):
        out.append(_int(n.value))
    elif isinstance(n, BoolConst):
        out.append("true" if n.value else "false")
    elif isinstance(n, Cmp):
        _app(n.op, (n.left, n.right), out)
    elif isinstance(n, Not):
        _app("not", (n.arg,), out)
    elif isinstance(n, And):
        _app("and", n.args, out)
    elif isinstance(n, Or):
        _app("or", n.args, out)
    elif isinstance(n, Implies):
        _app("=>", (n.left, n.right), out)
    elif isinstance(n, Iff):
        _app("=", (n.left, n.right), out)
    elif isinstance(n, Add):
        _app("+", n.args, out)
    elif isinstance(n, Sub):
        _app("-", (n.left, n.right), out)
    elif isinstance(n, Neg):
        _app("-", (n.arg,), out)
    elif isinstance(n, Mul):
        out.append(f"(* {_int(n.coeff)} ")
        _emit(n.arg, out)
        out.append(")")
    elif isinstance(n, Mod):
        out.append("(mod ")
        _emit(n.arg, out)
        out.append(f" {n.divisor})")
    elif isinstance(n, Div):
        out.append("(div ")
        _emit(n.arg, out)
        out.append(f" {n.divisor})")
    elif isinstance(n, Ite):
        _app("ite", (n.cond, n.then, n.orelse), out)
    elif isinstance(n, Exists):
        binders = " ".join(f"({v.name}!{v.index} Int)" for v in n.bound)
        out.append(f"(exists ({binders}) ")
        _emit(n.body, out)
        out.append(")")
    else:
        raise TypeError(f"cannot serialize {n!r}")


def _app(op: str, args: Iterable[Node], out: list[str]) -> None:
    out.append("(" + op)
    for a in args:
        out.append(" ")
        _emit(a, out)
    out.append(")")


def declarations(vars_: Iterable[Var]) -> str:
    return "".join(f"(declare-fun {v} () Int)" for v in sorted(set(vars_), key=lambda v: (v.name, v.index)))


def parse_var(name: str) -> Var:
    m = _VAR_RE.match(name)
    if not m:
        raise UnsupportedInterpolant(f"unknown symbol {name!r}")
    return Var(m["name"], int(m["index"]))


def parse_term(text: str) -> Node:
    """Parse a quantifier-free LIA term as printed by a solver."""
    try:
        sexpr = parse_one(text)
    except SExprError as exc:
        raise UnsupportedInterpolant(str(exc)) from None
    return from_sexpr(sexpr)


def from_sexpr(e: SExpr, env: dict | None = None) -> Node:
    return _Reader().read(e, env or {})


class _Reader:
    def read(self, e: SExpr, env: dict) -> Node:
        if isinstance(e, int):
            return IntConst(e)
        if isinstance(e, Symbol):
            if e.name in env:
                return env[e.name]
            if e.name == "true":
                return TRUE
            if e.name == "false":
                return FALSE
            return parse_var(e.name)
        if not isinstance(e, list) or not e:
            raise UnsupportedInterpolant(f"unexpected term {e!r}")
        head = e[0]
        if isinstance(head, list) and len(head) >= 2 and head[0] == Symbol("_"):
            raise UnsupportedInterpolant("indexed identifiers are not supported")
        if not isinstance(head, Symbol):
            raise UnsupportedInterpolant(f"unexpected head {head!r}")
        op = head.name
        if op == "let":
            return self._let(e, env)
        if op == "!":
            return self.read(e[1], env)
        if op in ("exists", "forall"):
            raise UnsupportedInterpolant("quantified interpolant")
        args = [self.read(a, env) for a in e[1:]]
        return self._apply(op, args)

    def _let(self, e: list, env: dict) -> Node:
        if len(e) != 3 or not isinstance(e[1], list):
            raise UnsupportedInterpolant("malformed let")
        inner = dict(env)
        for binding in e[1]:
            if not (isinstance(binding, list) and len(binding) == 2 and isinstance(binding[0], Symbol)):
                raise UnsupportedInterpolant("malformed let binding")
            inner[binding[0].name] = self.read(binding[1], env)
        return self.read(e[2], inner)

    def _apply(self, op: str, args: list) -> Node:
        def need(n):
            if len(args) != n:
                raise UnsupportedInterpolant(f"{op} expects {n} arguments")

        if op == "not":
            need(1)
            return neg(args[0])
        if op == "and":
            return conj(*args)
        if op == "or":
            return disj(*args)
        if op == "=>":
            if len(args) < 2:
                raise UnsupportedInterpolant("=> expects 2+ arguments")
            out = args[-1]
            for a in reversed(args[:-1]):
                out = Implies(a, out)
            return out
        if op == "xor":
            need(2)
            return Not(Iff(args[0], args[1]))
        if op in ("=", "distinct"):
            if len(args) < 2:
                raise UnsupportedInterpolant(f"{op} expects 2+ arguments")
            if all(is_formula(a) for a in args):
                pairs = [Iff(a, b) for a, b in zip(args, args[1:])]
            elif any(is_formula(a) for a in args):
                raise UnsupportedInterpolant("mixed-sort equality")
            elif op == "=":
                pairs = [Cmp("=", a, b) for a, b in zip(args, args[1:])]
            else:
                pairs = [
                    Not(Cmp("=", a, b)) for i, a in enumerate(args) for b in args[i + 1 :]
                ]
                return conj(*pairs)
            return conj(*pairs) if op == "=" else neg(conj(*pairs))
        if op in ("<", "<=", ">", ">="):
            if len(args) < 2:
                raise UnsupportedInterpolant(f"{op} expects 2+ arguments")
            return conj(*(Cmp(op, a, b) for a, b in zip(args, args[1:])))
        if op == "ite":
            need(3)
            c, t, f = args
            if is_formula(t):
                return disj(conj(c, t), conj(neg(c), f))
            return Ite(c, t, f)
        if any(is_formula(a) for a in args):
            raise UnsupportedInterpolant(f"boolean argument to {op}")
        if op == "+":
            return Add(tuple(args)) if len(args) > 1 else args[0]
        if op == "-":
            if len(args) == 1:
                a = args[0]
                return IntConst(-a.value) if isinstance(a, IntConst) else Neg(a)
            out = args[0]
            for a in args[1:]:
                out = Sub(out, a)
            return out
        if op == "*":
            coeff, rest = 1, []
            for a in args:
                if isinstance(a, IntConst):
                    coeff *= a.value
                else:
                    rest.append(a)
            if not rest:
                return IntConst(coeff)
            if len(rest) > 1:
                raise UnsupportedInterpolant("nonlinear multiplication")
            return Mul(coeff, rest[0])
        if op in ("mod", "div"):
            need(2)
            d = args[1]
            if not isinstance(d, IntConst) or d.value <= 0:
                raise UnsupportedInterpolant(f"{op} by non-positive or non-literal divisor")
            return Mod(args[0], d.value) if op == "mod" else Div(args[0], d.value)
        if op == "abs":
            need(1)
            return Ite(Cmp(">=", args[0], IntConst(0)), args[0], Neg(args[0]))
        raise UnsupportedInterpolant(f"unsupported operator {op!r}")

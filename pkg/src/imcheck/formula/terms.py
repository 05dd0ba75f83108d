"""Formula IR over SSA-indexed integer variables.

Terms and formulas share one immutable node family. Integer terms are
linear: multiplication only by a constant, ``mod``/``div`` only by a
positive literal (Euclidean semantics, as in SMT-LIB).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

CMP_OPS = ("=", "<", "<=", ">", ">=")


@dataclass(frozen=True, slots=True)
class IntConst:
    value: int


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    index: int

    def __str__(self) -> str:
        return f"{self.name}!{self.index}"


@dataclass(frozen=True, slots=True)
class Add:
    args: tuple


@dataclass(frozen=True, slots=True)
class Sub:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Term"


@dataclass(frozen=True, slots=True)
class Mul:
    coeff: int
    arg: "Term"


@dataclass(frozen=True, slots=True)
class Mod:
    arg: "Term"
    divisor: int

    def __post_init__(self):
        if self.divisor <= 0:
            raise ValueError(f"mod divisor must be a positive literal, got {self.divisor}")


@dataclass(frozen=True, slots=True)
class Div:
    arg: "Term"
    divisor: int

    def __post_init__(self):
        if self.divisor <= 0:
            raise ValueError(f"div divisor must be a positive literal, got {self.divisor}")


@dataclass(frozen=True, slots=True)
class Ite:
    cond: "Formula"
    then: "Term"
    orelse: "Term"


@dataclass(frozen=True, slots=True)
class BoolConst:
    value: bool


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str
    left: "Term"
    right: "Term"

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    args: tuple


@dataclass(frozen=True, slots=True)
class Or:
    args: tuple


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Exists:
    # Only used by the engine for certificate and k-induction queries;
    # never passed to interpolation.
    bound: tuple
    body: "Formula"


Term = Union[IntConst, Var, Add, Sub, Neg, Mul, Mod, Div, Ite]
Formula = Union[BoolConst, Cmp, Not, And, Or, Implies, Iff, Exists]
Node = Union[Term, Formula]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def conj(*fs: Formula) -> Formula:
    out = []
    for f in fs:
        if isinstance(f, BoolConst):
            if not f.value:
                return FALSE
            continue
        if isinstance(f, And):
            out.extend(f.args)
        else:
            out.append(f)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*fs: Formula) -> Formula:
    out = []
    for f in fs:
        if isinstance(f, BoolConst):
            if f.value:
                return TRUE
            continue
        if isinstance(f, Or):
            out.extend(f.args)
        else:
            out.append(f)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return BoolConst(not f.value)
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    if isinstance(a, BoolConst):
        return b if a.value else TRUE
    if isinstance(b, BoolConst) and b.value:
        return TRUE
    return Implies(a, b)


def eq(a: Term, b: Term) -> Formula:
    return Cmp("=", a, b)


def exists(bound: Iterable[Var], body: Formula) -> Formula:
    bound = tuple(sorted(set(bound), key=_var_key))
    if not bound or isinstance(body, BoolConst):
        return body
    return Exists(bound, body)


def _var_key(v: Var):
    return (v.name, v.index)


def is_formula(n: Node) -> bool:
    return isinstance(n, (BoolConst, Cmp, Not, And, Or, Implies, Iff, Exists))


def children(n: Node) -> tuple:
    if isinstance(n, (IntConst, Var, BoolConst)):
        return ()
    if isinstance(n, (Add, And, Or)):
        return n.args
    if isinstance(n, (Sub, Cmp, Implies, Iff)):
        return (n.left, n.right)
    if isinstance(n, (Neg, Not)):
        return (n.arg,)
    if isinstance(n, (Mul, Mod, Div)):
        return (n.arg,)
    if isinstance(n, Ite):
        return (n.cond, n.then, n.orelse)
    if isinstance(n, Exists):
        return (n.body,)
    raise TypeError(f"not a formula node: {n!r}")


def rebuild(n: Node, kids: tuple) -> Node:
    if isinstance(n, (IntConst, Var, BoolConst)):
        return n
    if isinstance(n, Add):
        return Add(kids)
    if isinstance(n, And):
        return conj(*kids)
    if isinstance(n, Or):
        return disj(*kids)
    if isinstance(n, Sub):
        return Sub(*kids)
    if isinstance(n, Cmp):
        return Cmp(n.op, *kids)
    if isinstance(n, Implies):
        return Implies(*kids)
    if isinstance(n, Iff):
        return Iff(*kids)
    if isinstance(n, Neg):
        return Neg(kids[0])
    if isinstance(n, Not):
        return neg(kids[0])
    if isinstance(n, Mul):
        return Mul(n.coeff, kids[0])
    if isinstance(n, Mod):
        return Mod(kids[0], n.divisor)
    if isinstance(n, Div):
        return Div(kids[0], n.divisor)
    if isinstance(n, Ite):
        return Ite(*kids)
    if isinstance(n, Exists):
        return Exists(n.bound, kids[0])
    raise TypeError(f"not a formula node: {n!r}")


def free_vars(n: Node) -> frozenset:
    out: set = set()
    _collect(n, frozenset(), out, set())
    return frozenset(out)


def _collect(n: Node, bound: frozenset, out: set, seen: set) -> None:
    key = (id(n), bound)
    if key in seen:
        return
    seen.add(key)
    if isinstance(n, Var):
        if n not in bound:
            out.add(n)
        return
    if isinstance(n, Exists):
        _collect(n.body, bound | set(n.bound), out, seen)
        return
    for c in children(n):
        _collect(c, bound, out, seen)


def all_vars(n: Node) -> frozenset:
    """Free and bound variables alike."""
    out: set = set()
    seen: set = set()
    stack = [n]
    while stack:
        m = stack.pop()
        if id(m) in seen:
            continue
        seen.add(id(m))
        if isinstance(m, Var):
            out.add(m)
        elif isinstance(m, Exists):
            out.update(m.bound)
        stack.extend(children(m))
    return frozenset(out)


def rename(n: Node, fn: Callable[[Var], Var]) -> Node:
    """Apply ``fn`` to every free variable occurrence."""
    memo: dict = {}

    def go(m: Node, bound: frozenset) -> Node:
        if isinstance(m, Var):
            return m if m in bound else fn(m)
        if isinstance(m, (IntConst, BoolConst)):
            return m
        if isinstance(m, Exists):
            return Exists(m.bound, go(m.body, bound | set(m.bound)))
        key = (id(m), bound)
        if key in memo:
            return memo[key]
        out = rebuild(m, tuple(go(c, bound) for c in children(m)))
        memo[key] = out
        return out

    return go(n, frozenset())


def substitute(n: Node, mapping: Mapping[Var, Var]) -> Node:
    return rename(n, lambda v: mapping.get(v, v))


def size(n: Node) -> int:
    return 1 + sum(size(c) for c in children(n))


def evaluate(n: Node, env: Mapping[Var, int]):
    """Evaluate a quantifier-free node under a total variable assignment."""
    if isinstance(n, IntConst):
        return n.value
    if isinstance(n, Var):
        try:
            return env[n]
        except KeyError:
            raise KeyError(f"no value for {n}") from None
    if isinstance(n, BoolConst):
        return n.value
    if isinstance(n, Add):
        return sum(evaluate(a, env) for a in n.args)
    if isinstance(n, Sub):
        return evaluate(n.left, env) - evaluate(n.right, env)
    if isinstance(n, Neg):
        return -evaluate(n.arg, env)
    if isinstance(n, Mul):
        return n.coeff * evaluate(n.arg, env)
    if isinstance(n, Mod):
        # Python's % and // agree with Euclidean semantics for positive divisors.
        return evaluate(n.arg, env) % n.divisor
    if isinstance(n, Div):
        return evaluate(n.arg, env) // n.divisor
    if isinstance(n, Ite):
        return evaluate(n.then if evaluate(n.cond, env) else n.orelse, env)
    if isinstance(n, Cmp):
        a, b = evaluate(n.left, env), evaluate(n.right, env)
        return {"=": a == b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[n.op]
    if isinstance(n, Not):
        return not evaluate(n.arg, env)
    if isinstance(n, And):
        return all(evaluate(a, env) for a in n.args)
    if isinstance(n, Or):
        return any(evaluate(a, env) for a in n.args)
    if isinstance(n, Implies):
        return (not evaluate(n.left, env)) or evaluate(n.right, env)
    if isinstance(n, Iff):
        return evaluate(n.left, env) == evaluate(n.right, env)
    raise TypeError(f"cannot evaluate {type(n).__name__}")

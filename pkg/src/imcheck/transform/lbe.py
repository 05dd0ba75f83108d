"""Large-block encoding of a single-loop CFA into INIT / TRANS / ERROR templates.

Every loop-free region between the initial location, the loop head and the
error locations is folded into one formula. Sequential edges thread SSA
indices; at merge points each live variable whose incoming indices differ
gets a fresh index plus one equality per incoming branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from ..formula import (
    FALSE,
    TRUE,
    Add,
    Cmp,
    Div,
    FormulaTemplate,
    IndexPool,
    IntConst,
    Mod,
    Mul,
    Neg,
    SsaMap,
    Sub,
    Var,
    conj,
    declarations,
    disj,
    eq,
    free_vars,
    neg,
    to_smtlib,
)
from ..frontend.ast import BinOp, BoolOp, Compare, IntLit, LogicalNot, Name, UnaryMinus
from ..frontend.cfa import AssignOp, AssumeOp, Cfa, HavocOp, all_vars, op_defs, op_uses
from .loops import UnsupportedShape, loop_heads

SINK = "sink"


@dataclass(frozen=True)
class SummarizedSystem:
    init: FormulaTemplate
    trans: FormulaTemplate
    error: FormulaTemplate
    pre_error: FormulaTemplate | None
    state_vars: tuple
    loop_free: bool
    variables: tuple
    loop_head: int | None = None

    def zero_map(self) -> SsaMap:
        return SsaMap.zero(self.variables)


# expression translation


def _const(e) -> int | None:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, UnaryMinus):
        c = _const(e.arg)
        return None if c is None else -c
    return None


def term(e, m) -> object:
    if isinstance(e, IntLit):
        return IntConst(e.value)
    if isinstance(e, Name):
        return Var(e.ident, m[e.ident])
    if isinstance(e, UnaryMinus):
        return Neg(term(e.arg, m))
    if isinstance(e, BinOp):
        if e.op == "+":
            return Add((term(e.left, m), term(e.right, m)))
        if e.op == "-":
            return Sub(term(e.left, m), term(e.right, m))
        if e.op == "*":
            c = _const(e.left)
            if c is not None:
                return Mul(c, term(e.right, m))
            c = _const(e.right)
            if c is None:
                raise ValueError("non-linear multiplication")
            return Mul(c, term(e.left, m))
        divisor = _const(e.right)
        if e.op == "%":
            return Mod(term(e.left, m), divisor)
        if e.op == "/":
            return Div(term(e.left, m), divisor)
    raise TypeError(f"not an integer expression: {e!r}")


_CMP = {"==": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def cond(c, m):
    if isinstance(c, Compare):
        left, right = term(c.left, m), term(c.right, m)
        if c.op == "!=":
            return neg(Cmp("=", left, right))
        if isinstance(c.left, IntLit) and isinstance(c.right, IntLit):
            # keep trivially true guards out of the formulas
            return TRUE if _py_cmp(c.op, c.left.value, c.right.value) else FALSE
        return Cmp(_CMP[c.op], left, right)
    if isinstance(c, BoolOp):
        parts = (cond(c.left, m), cond(c.right, m))
        return conj(*parts) if c.op == "&&" else disj(*parts)
    if isinstance(c, LogicalNot):
        return neg(cond(c.arg, m))
    raise TypeError(f"not a condition: {c!r}")


def _py_cmp(op: str, a: int, b: int) -> bool:
    return {"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


# liveness


def live_variables(cfa: Cfa) -> dict:
    """Backward liveness; error locations are terminal."""
    live = {loc: set() for loc in cfa.locations}
    edges = [e for e in cfa.edges if e.source not in cfa.errors]
    changed = True
    while changed:
        changed = False
        for e in edges:
            new = op_uses(e.op) | (live[e.target] - op_defs(e.op))
            if not new <= live[e.source]:
                live[e.source] |= new
                changed = True
    return live


# region folding


class _Region:
    def __init__(self, cfa: Cfa, source, targets: set, blocked: set, live: dict, variables):
        self.cfa = cfa
        self.live = live
        self.variables = variables
        g = nx.DiGraph()
        g.add_node(source)
        self.edges: dict = {}
        work, seen = [source], {source}
        while work:
            u = work.pop()
            for e in cfa.out_edges(u):
                if e.target in targets:
                    dst = SINK
                elif e.target in blocked:
                    continue
                else:
                    dst = e.target
                g.add_edge(u, dst)
                self.edges.setdefault((u, dst), []).append(e)
                if dst != SINK and dst not in seen:
                    seen.add(dst)
                    work.append(dst)
        if SINK not in g:
            self.graph = None
            return
        keep = nx.ancestors(g, SINK) | {SINK}
        self.graph = g.subgraph(keep).copy()
        self.source = source
        if not nx.is_directed_acyclic_graph(self.graph):
            raise UnsupportedShape("a cycle avoids the loop head")

    def fold(self, pool: IndexPool, sink_vars, force_fresh: bool):
        """Return (formula, exit map) for all source-to-sink paths.

        ``sink_vars`` are reconciled at the sink; with ``force_fresh`` none of
        them keeps its entry index.
        """
        if self.graph is None:
            return FALSE, SsaMap.zero(self.variables)
        g = self.graph
        idom = nx.immediate_dominators(g, self.source)
        order = list(nx.topological_sort(g))
        maps = {self.source: SsaMap.zero(self.variables)}
        local: dict = {self.source: TRUE}

        def chain(top, u):
            parts = []
            while u != top:
                parts.append(local[u])
                u = idom[u]
            return conj(*reversed(parts))

        for n in order:
            if n == self.source:
                continue
            branches = []
            for u in g.predecessors(n):
                for e in self.edges[(u, n)]:
                    f, m = self._edge(e, maps[u], pool)
                    branches.append((chain(idom[n], u), f, m))
            names = sink_vars if n == SINK else sorted(self.live.get(n, ()))
            merged = dict(branches[0][2])
            eqs = [[] for _ in branches]
            for v in names:
                indices = {b[2][v] for b in branches}
                # an entry index (0) must not leak out as an exit index of TRANS
                if len(indices) > 1 or (n == SINK and force_fresh and 0 in indices):
                    j = pool.fresh(v)
                    merged[v] = j
                    for k, b in enumerate(branches):
                        eqs[k].append(eq(Var(v, j), Var(v, b[2][v])))
            maps[n] = SsaMap(merged)
            local[n] = disj(*(conj(c, f, *q) for (c, f, _), q in zip(branches, eqs)))
        return conj(*(local[w] for w in _dom_path(idom, self.source, SINK))), maps[SINK]

    @staticmethod
    def _edge(e, m: SsaMap, pool: IndexPool):
        op = e.op
        if isinstance(op, AssumeOp):
            return cond(op.cond, m), m
        if isinstance(op, AssignOp):
            rhs = term(op.expr, m)
            j = pool.fresh(op.var)
            return eq(Var(op.var, j), rhs), m.with_(op.var, j)
        if isinstance(op, HavocOp):
            return TRUE, m.with_(op.var, pool.fresh(op.var))
        raise TypeError(f"unknown operation {op!r}")


def _dom_path(idom: dict, source, node) -> list:
    out = []
    while node != source:
        out.append(node)
        node = idom[node]
    return list(reversed(out))


def _zero_init(body, out_map: SsaMap, names) -> object:
    """Declared variables start at zero: constrain every generation-0 use."""
    if body == FALSE:
        return body
    zero = {v for v in free_vars(body) if v.index == 0}
    zero |= {Var(n, 0) for n in names if out_map.get(n) == 0}
    return conj(*(eq(v, IntConst(0)) for v in sorted(zero, key=lambda v: v.name)), body)


def _template(body, out_map: SsaMap, variables) -> FormulaTemplate:
    return FormulaTemplate(body, SsaMap.zero(variables), out_map)


def large_block_encode(cfa: Cfa) -> SummarizedSystem:
    """Summarize a single-loop (or loop-free) CFA."""
    heads = loop_heads(cfa)
    if len(heads) > 1:
        raise UnsupportedShape(f"{len(heads)} loop heads; run the single-loop transformation first")
    variables = all_vars(cfa)
    live = live_variables(cfa)
    errors = set(cfa.errors)
    zero = SsaMap.zero(variables)

    if not heads:
        pool = IndexPool()
        body, out = _Region(cfa, cfa.initial, errors, set(), live, variables).fold(pool, (), False)
        error = _template(_zero_init(body, out, ()), zero, variables)
        return SummarizedSystem(
            init=_template(TRUE, zero, variables),
            trans=_template(FALSE, zero, variables),
            error=error,
            pre_error=None,
            state_vars=(),
            loop_free=True,
            variables=variables,
        )

    head = heads[0]
    state_vars = tuple(sorted(live[head]))

    pool = IndexPool()
    body, out = _Region(cfa, cfa.initial, {head}, errors, live, variables).fold(pool, state_vars, False)
    init = _template(_zero_init(body, out, state_vars), out, variables)

    pool = IndexPool()
    body, out = _Region(cfa, head, {head}, errors, live, variables).fold(pool, state_vars, True)
    trans = _template(body, out, variables)

    pool = IndexPool()
    body, out = _Region(cfa, head, errors, {head}, live, variables).fold(pool, (), False)
    error = _template(body, zero, variables)

    pre_error = None
    if cfa.initial not in errors:
        pool = IndexPool()
        body, out = _Region(cfa, cfa.initial, errors, {head}, live, variables).fold(pool, (), False)
        if body != FALSE:
            pre_error = _template(_zero_init(body, out, ()), zero, variables)
    else:
        pre_error = _template(TRUE, zero, variables)

    return SummarizedSystem(init, trans, error, pre_error, state_vars, False, variables, head)


def system_to_smtlib(sys: SummarizedSystem) -> str:
    """Render the three templates as ``define-fun`` bodies, for inspection."""
    lines = [f"; state variables: {' '.join(sys.state_vars) or '(none)'}"]
    parts = [("INIT", sys.init), ("TRANS", sys.trans), ("ERROR", sys.error)]
    if sys.pre_error is not None:
        parts.append(("PRE_ERROR", sys.pre_error))
    vs = set()
    for _, t in parts:
        vs |= free_vars(t.body)
    lines.append(declarations(vs).replace(")(", ")\n("))
    for name, t in parts:
        lines.append(f"(define-fun {name} () Bool {to_smtlib(t.body)})")
    return "\n".join(line for line in lines if line) + "\n"

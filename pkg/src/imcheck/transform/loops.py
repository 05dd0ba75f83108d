"""Loop detection and the single-loop (program-counter dispatch) transformation."""

from __future__ import annotations

import itertools

import networkx as nx

from ..frontend.ast import Compare, IntLit, Name
from ..frontend.cfa import AssignOp, AssumeOp, Cfa, Edge, TRUE_COND

PC = "__pc"


class UnsupportedShape(Exception):
    pass


def control_graph(cfa: Cfa) -> nx.DiGraph:
    """Location graph with error locations treated as terminal."""
    g = nx.DiGraph()
    g.add_nodes_from(cfa.locations)
    g.add_edges_from((e.source, e.target) for e in cfa.edges if e.source not in cfa.errors)
    return g


def back_edges(cfa: Cfa) -> list[tuple[int, int]]:
    g = control_graph(cfa)
    out = []
    on_stack = {cfa.initial}
    visited = {cfa.initial}
    stack = [(cfa.initial, iter(sorted(g.successors(cfa.initial))))]
    while stack:
        node, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            on_stack.discard(node)
            continue
        if nxt in on_stack:
            out.append((node, nxt))
        elif nxt not in visited:
            visited.add(nxt)
            on_stack.add(nxt)
            stack.append((nxt, iter(sorted(g.successors(nxt)))))
    return out


def loop_heads(cfa: Cfa) -> list[int]:
    """Targets of DFS back edges; raises UnsupportedShape on irreducible flow."""
    edges = back_edges(cfa)
    if not edges:
        return []
    idom = nx.immediate_dominators(control_graph(cfa), cfa.initial)
    for src, head in edges:
        if not _dominates(idom, head, src):
            raise UnsupportedShape(f"irreducible control flow: back edge {src}->{head}")
    return sorted({head for _, head in edges})


def _dominates(idom: dict, a: int, b: int) -> bool:
    while True:
        if b == a:
            return True
        parent = idom.get(b, b)
        if parent == b:
            return False
        b = parent


def single_loop_transform(cfa: Cfa) -> Cfa:
    """Rewrite a multi-loop CFA into one whose cycles all pass through one head.

    Each original loop head gets an id 1..n stored in ``__pc`` (which starts
    at 0); the new head dispatches on ``__pc`` into a copy of the acyclic
    region that starts at the corresponding original head.
    """
    heads = loop_heads(cfa)
    if len(heads) <= 1:
        return cfa
    head_id = {h: i + 1 for i, h in enumerate(heads)}
    ids = itertools.count()
    edges: list[Edge] = []
    errors: set = set()
    exit_copies: set = set()
    locations: set = set()

    def new() -> int:
        loc = next(ids)
        locations.add(loc)
        return loc

    initial = new()
    dispatch = new()
    succ = cfa.successors()

    def copy_region(start: int, start_copy: int) -> None:
        copies = {start: start_copy}
        if start in cfa.errors:
            errors.add(start_copy)
            return
        work = [start]
        while work:
            u = work.pop()
            if u in cfa.errors:
                continue
            for e in succ[u]:
                if e.target in head_id:
                    mid = new()
                    edges.append(Edge(copies[u], e.op, mid))
                    edges.append(Edge(mid, AssignOp(PC, IntLit(head_id[e.target])), dispatch))
                    continue
                if e.target not in copies:
                    copies[e.target] = new()
                    if e.target in cfa.errors:
                        errors.add(copies[e.target])
                    if e.target == cfa.exit:
                        exit_copies.add(copies[e.target])
                    work.append(e.target)
                edges.append(Edge(copies[u], e.op, copies[e.target]))

    copy_region(cfa.initial, initial)
    for h in heads:
        entry = new()
        edges.append(Edge(dispatch, AssumeOp(Compare("==", Name(PC), IntLit(head_id[h]))), entry))
        copy_region(h, entry)

    # one shared exit keeps the result tidy
    exit_ = None
    if exit_copies:
        exit_ = new()
        for x in exit_copies:
            edges.append(Edge(x, AssumeOp(TRUE_COND), exit_))

    variables = tuple(cfa.variables) + (PC,)
    out = Cfa(locations, edges, initial, errors, variables, exit_)
    from ..frontend.cfa import prune

    out = prune(out)
    if len(loop_heads(out)) > 1:
        raise UnsupportedShape("single-loop transformation left several loop heads")
    return out

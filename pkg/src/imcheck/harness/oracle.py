"""Explicit-state interpreters used as independent oracles.

Nothing here touches formulas or the solver: states are concrete integer
assignments and operations are executed directly. Depth is counted as in
the verifier, the number of loop traversals before the error, which is the
number of loop-head visits minus one (zero for errors before any loop).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend.ast import (
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
from ..frontend.cfa import AssignOp, AssumeOp, Cfa, HavocOp

TEMP_PREFIX = "__nd"


class EvalError(Exception):
    pass


def eval_expr(e, env) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Name):
        return env[e.ident]
    if isinstance(e, UnaryMinus):
        return -eval_expr(e.arg, env)
    if isinstance(e, BinOp):
        a, b = eval_expr(e.left, env), eval_expr(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b <= 0:
            raise EvalError(f"{e.op} by non-positive {b}")
        # floor division and modulo coincide with the Euclidean ones for b > 0
        return a // b if e.op == "/" else a % b
    raise EvalError(f"not an expression: {e!r}")


def eval_cond(c, env) -> bool:
    if isinstance(c, Compare):
        a, b = eval_expr(c.left, env), eval_expr(c.right, env)
        return {
            "==": a == b,
            "!=": a != b,
            "<": a < b,
            "<=": a <= b,
            ">": a > b,
            ">=": a >= b,
        }[c.op]
    if isinstance(c, BoolOp):
        if c.op == "&&":
            return eval_cond(c.left, env) and eval_cond(c.right, env)
        return eval_cond(c.left, env) or eval_cond(c.right, env)
    if isinstance(c, LogicalNot):
        return not eval_cond(c.arg, env)
    raise EvalError(f"not a condition: {c!r}")


def loop_heads(cfa: Cfa) -> set:
    """Targets of DFS back edges, i.e. edges into a location still on the DFS stack."""
    succ = {loc: [] for loc in cfa.locations}
    for e in cfa.edges:
        if e.source not in cfa.errors:
            succ[e.source].append(e.target)
    heads, on_stack, done = set(), {cfa.initial}, set()
    stack = [(cfa.initial, iter(succ[cfa.initial]))]
    while stack:
        loc, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            on_stack.discard(loc)
            done.add(loc)
        elif nxt in on_stack:
            heads.add(nxt)
        elif nxt not in done:
            on_stack.add(nxt)
            stack.append((nxt, iter(succ[nxt])))
    return heads


def _step(op, env: dict, domain_bound: int, havoc_values) -> list:
    """Successor environments of ``env`` under ``op``; None marks a pruned value."""
    if isinstance(op, AssumeOp):
        return [env] if eval_cond(op.cond, env) else []
    if isinstance(op, AssignOp):
        v = eval_expr(op.expr, env)
        if abs(v) > domain_bound:
            return [None]
        return [{**env, op.var: v}]
    if isinstance(op, HavocOp):
        return [{**env, op.var: v} for v in havoc_values(op.var)]
    raise EvalError(f"unknown operation {op!r}")


def _default_havoc(domain_bound: int):
    full = list(range(-domain_bound, domain_bound + 1))

    def values(var: str):
        # a temporary only feeds its own "!= 0" test, so two values suffice
        return [0, 1] if var.startswith(TEMP_PREFIX) else full

    return values


@dataclass
class OracleResult:
    """Outcome of a bounded exhaustive exploration.

    ``error_depths`` holds every depth at which some newly discovered state
    reaches an error; its minimum is exact. ``exhaustive`` means no state was
    cut off by the depth bound, so the verdict is exact within the value
    bound; ``truncated`` reports that some assignment left the value range
    and was dropped.
    """

    error_depths: set = field(default_factory=set)
    exhaustive: bool = False
    truncated: bool = False
    head_states: dict = field(default_factory=dict)
    explored: int = 0

    @property
    def error_reachable(self) -> bool:
        return bool(self.error_depths)

    @property
    def min_depth(self):
        return min(self.error_depths) if self.error_depths else None


def interpret_bounded(
    cfa: Cfa,
    max_steps: int,
    domain_bound: int,
    *,
    heads: set | None = None,
    record_depths: int = -1,
    havoc_values=None,
) -> OracleResult:
    """Breadth-first search over concrete states, layer by loop-head visit.

    ``max_steps`` bounds the number of loop traversals explored and
    ``domain_bound`` the absolute value of every variable. States at the loop
    head after exactly i traversals are kept in ``head_states[i]`` for
    i <= ``record_depths``; those layers are not deduplicated against earlier
    ones so the sets are complete.
    """
    if max_steps < 0 or domain_bound < 0:
        raise ValueError("bounds must be non-negative")
    heads = loop_heads(cfa) if heads is None else heads
    havoc_values = havoc_values or _default_havoc(domain_bound)
    succ = cfa.successors()
    variables = tuple(cfa.variables)
    res = OracleResult()
    seen_heads: set = set()

    def key(loc, env):
        return loc, tuple(env.get(v, 0) for v in variables)

    frontier = [(cfa.initial, {v: 0 for v in variables})]
    if cfa.initial in cfa.errors:
        res.error_depths.add(0)
        res.exhaustive = True
        return res
    visits = 0
    while frontier:
        reached: dict = {}
        layer_seen: set = set()
        stack = list(frontier)
        while stack:
            loc, env = stack.pop()
            for e in succ[loc]:
                for nxt in _step(e.op, env, domain_bound, havoc_values):
                    if nxt is None:
                        res.truncated = True
                        continue
                    k = key(e.target, nxt)
                    if e.target in cfa.errors:
                        res.error_depths.add(max(0, visits - 1))
                        continue
                    if e.target in heads:
                        reached.setdefault(k, nxt)
                        continue
                    if k in layer_seen:
                        continue
                    layer_seen.add(k)
                    res.explored += 1
                    stack.append((e.target, nxt))
        visits += 1
        depth = visits - 1
        if depth <= record_depths:
            res.head_states[depth] = {k[1] for k in reached}
            layer = list(reached.items())
        else:
            layer = [(k, env) for k, env in reached.items() if k not in seen_heads]
        seen_heads.update(reached)
        if not layer:
            res.exhaustive = True
            break
        if depth >= max_steps + 1:
            # errors at depth max_steps were found while building this layer
            break
        res.explored += len(layer)
        frontier = [(loc, env) for (loc, _), env in layer]
    return res


# counterexample replay


@dataclass
class ReplayResult:
    ok: bool
    depth: int | None = None
    reason: str = ""


def _region_search(cfa: Cfa, start, env, stops: set, havoc_values, limit: int = 200000):
    """All (location, env) pairs in ``stops`` reachable from ``start`` without passing a stop."""
    succ = cfa.successors()
    out = []
    stack = [(start, env)]
    count = 0
    while stack:
        loc, cur = stack.pop()
        for e in succ[loc]:
            for nxt in _step(e.op, cur, 1 << 62, havoc_values):
                count += 1
                if count > limit:
                    return out
                if e.target in stops:
                    out.append((e.target, nxt))
                else:
                    stack.append((e.target, nxt))
    return out


def replay_counterexample(cfa: Cfa, loop_head, state_vars, cex, variables=None) -> ReplayResult:
    """Re-execute a counterexample on ``cfa`` (the single-loop CFA the system came from).

    Havoc values are drawn from the values the model assigns to any SSA copy
    of the havocked variable; at each loop-head visit the concrete state must
    match the model's state at that visit. Success means an error location
    is reached after exactly ``cex.depth`` loop traversals.
    """
    variables = tuple(variables or cfa.variables)
    pool: dict = {}
    for var, val in cex.model.items():
        pool.setdefault(var.name, set()).add(val)

    def havoc_values(name: str):
        return sorted(pool.get(name, set()) | {0, 1})

    zero = {v: 0 for v in variables}
    errors = set(cfa.errors)
    if loop_head is None:
        hits = _region_search(cfa, cfa.initial, zero, errors, havoc_values)
        return ReplayResult(bool(hits), 0 if hits else None, "" if hits else "no error path in the loop-free program")
    stops = errors | {loop_head}
    first = _region_search(cfa, cfa.initial, zero, stops, havoc_values)
    if cex.depth == 0 and any(loc in errors for loc, _ in first):
        return ReplayResult(True, 0)

    def matches(env, i) -> bool:
        want = cex.head_state(i, state_vars)
        return all(env.get(v, 0) == val for v, val in want.items())

    current = [env for loc, env in first if loc == loop_head and matches(env, 0)]
    if not current:
        return ReplayResult(False, None, "no execution reaches the loop head in the model's first state")
    for i in range(1, cex.depth + 1):
        nxt = []
        for env in current:
            nxt += [e for loc, e in _region_search(cfa, loop_head, env, stops, havoc_values) if loc == loop_head and matches(e, i)]
        if not nxt:
            return ReplayResult(False, None, f"loop traversal {i} does not reproduce the model's state")
        current = _dedupe(nxt, variables)
    for env in current:
        if any(loc in errors for loc, _ in _region_search(cfa, loop_head, env, stops, havoc_values)):
            return ReplayResult(True, cex.depth)
    return ReplayResult(False, None, "no error reached from the model's last loop-head state")


def _dedupe(envs, variables):
    out = {}
    for env in envs:
        out.setdefault(tuple(env.get(v, 0) for v in variables), env)
    return list(out.values())


# AST interpreter, used to cross-check the CFA construction


@dataclass
class Execution:
    """One run driven by a fixed sequence of nondeterministic values."""

    outcome: str  # "exit", "error", "blocked", "diverged" or "inputs-exhausted"
    env: dict
    consumed: int


class _Stop(Exception):
    def __init__(self, outcome: str):
        self.outcome = outcome


def run_ast(program: Program, inputs, fuel: int = 10000) -> Execution:
    """Execute ``program`` taking each nondet() value from ``inputs`` in order.

    Bare nondet() conditions consume their values left to right before the
    condition is evaluated, like the desugared form does.
    """
    env = {d: 0 for d in program.decls}
    it = iter(inputs)
    state = {"consumed": 0, "fuel": fuel}

    def take() -> int:
        try:
            v = next(it)
        except StopIteration:
            raise _Stop("inputs-exhausted") from None
        state["consumed"] += 1
        return v

    def prepare(c):
        if isinstance(c, NondetCond):
            return Compare("!=", IntLit(take()), IntLit(0))
        if isinstance(c, BoolOp):
            left = prepare(c.left)
            return BoolOp(c.op, left, prepare(c.right))
        if isinstance(c, LogicalNot):
            return LogicalNot(prepare(c.arg))
        return c

    def tick():
        state["fuel"] -= 1
        if state["fuel"] < 0:
            raise _Stop("diverged")

    def run(s):
        tick()
        if isinstance(s, Assign):
            env[s.target] = eval_expr(s.value, env)
        elif isinstance(s, AssignNondet):
            env[s.target] = take()
        elif isinstance(s, Block):
            for inner in s.stmts:
                run(inner)
        elif isinstance(s, If):
            if eval_cond(prepare(s.cond), env):
                run(s.then)
            elif s.orelse is not None:
                run(s.orelse)
        elif isinstance(s, While):
            while eval_cond(prepare(s.cond), env):
                run(s.body)
                tick()
        elif isinstance(s, Assert):
            if not eval_cond(prepare(s.cond), env):
                raise _Stop("error")
        elif isinstance(s, Assume):
            if not eval_cond(prepare(s.cond), env):
                raise _Stop("blocked")
        elif isinstance(s, ErrorLabel):
            raise _Stop("error")
        elif isinstance(s, Return):
            raise _Stop("exit")
        else:
            raise EvalError(f"unknown statement {s!r}")

    try:
        run(Block(program.body))
        outcome = "exit"
    except _Stop as stop:
        outcome = stop.outcome
    return Execution(outcome, dict(env), state["consumed"])


def run_cfa(cfa: Cfa, inputs, declared, fuel: int = 10000) -> Execution:
    """Execute ``cfa`` deterministically, taking havoc values from ``inputs``."""
    succ = cfa.successors()
    env = {v: 0 for v in cfa.variables}
    it = iter(inputs)
    consumed = 0
    loc = cfa.initial
    while True:
        if loc in cfa.errors:
            outcome = "error"
            break
        if loc == cfa.exit:
            outcome = "exit"
            break
        fuel -= 1
        if fuel < 0:
            outcome = "diverged"
            break
        moved = False
        for e in succ[loc]:
            if isinstance(e.op, HavocOp):
                try:
                    v = next(it)
                except StopIteration:
                    return Execution("inputs-exhausted", {d: env[d] for d in declared}, consumed)
                consumed += 1
                env = {**env, e.op.var: v}
            elif isinstance(e.op, AssignOp):
                env = {**env, e.op.var: eval_expr(e.op.expr, env)}
            elif not eval_cond(e.op.cond, env):
                continue
            loc = e.target
            moved = True
            break
        if not moved:
            outcome = "blocked" if succ[loc] else "exit"
            break
    return Execution(outcome, {d: env[d] for d in declared}, consumed)

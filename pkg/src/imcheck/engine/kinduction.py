"""Plain k-induction baseline, without auxiliary invariants."""

from __future__ import annotations

from ..formula import Var, conj, exists, free_vars, neg
from ..solver import SolverClient, SolverError, Status as SatStatus
from ..transform.lbe import SummarizedSystem
from .bmc import bmc_step, run_bmc
from .unroll import Unroller
from .verdict import Counterexample, Status, Verdict


def safe_at(unroller: Unroller, m, state_vars):
    """P(s): no ERROR block starts from the state at generation m."""
    err = unroller.error(m)
    gen = {Var(v, m[v]) for v in state_vars}
    return neg(exists(set(free_vars(err)) - gen, err))


def step_query(unroller: Unroller, k: int, state_vars):
    """k consecutive safe loop-head states followed by an error block."""
    m = unroller.zero()
    parts = []
    for _ in range(k):
        parts.append(safe_at(unroller, m, state_vars))
        t, m = unroller.trans(m)
        parts.append(t)
    parts.append(unroller.error(m))
    return conj(*parts)


def run_kinduction(sys: SummarizedSystem, k_max: int, client: SolverClient) -> Verdict:
    if k_max < 1:
        raise ValueError("k_max must be positive")
    if sys.loop_free:
        v = run_bmc(sys, 1, client)
        v.algorithm = "kind"
        return v
    unroller = Unroller(sys)
    queries: list = []
    k = 0
    try:
        for k in range(1, k_max + 1):
            r, q = bmc_step(client, unroller, k, queries)
            if r.is_sat:
                return Verdict(Status.FALSE, k, "kind", counterexample=Counterexample(k - 1, r.model, q.maps), queries=queries)
            if r.status is SatStatus.UNKNOWN:
                return Verdict(Status.UNKNOWN, k, "kind", reason="solver-unknown", queries=queries)
            step = client.check_sat(step_query(unroller, k, sys.state_vars), model=False)
            if step.is_unsat:
                return Verdict(Status.TRUE, k, "kind", queries=queries)
    except SolverError as exc:
        return Verdict(Status.UNKNOWN, k, "kind", reason=f"{type(exc).__name__}: {exc}", queries=queries)
    return Verdict(Status.UNKNOWN, k_max, "kind", reason="bound-exhausted", queries=queries)


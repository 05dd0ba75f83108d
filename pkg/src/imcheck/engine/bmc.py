"""Bounded model checking over the summarized system."""

from __future__ import annotations

from ..solver import SolverClient, SolverError, Status as SatStatus
from ..transform.lbe import SummarizedSystem
from .unroll import Unroller
from .verdict import Counterexample, Status, Verdict


def bmc_step(client: SolverClient, unroller: Unroller, k: int, queries: list):
    """Check the query at bound k; returns (SatResult, Query)."""
    q = unroller.query(k)
    queries.append({"k": k, "trans_instances": q.trans_instances, "formula": q.formula})
    return client.check_sat(q.formula), q


def run_bmc(sys: SummarizedSystem, k_max: int, client: SolverClient) -> Verdict:
    """FALSE at the first satisfiable bound, UNKNOWN once ``k_max`` is spent.

    Loop-free systems are decided by the single query at k = 1.
    """
    if k_max < 1:
        raise ValueError("k_max must be positive")
    unroller = Unroller(sys)
    queries: list = []
    last = 0
    try:
        for k in range(1, (1 if sys.loop_free else k_max) + 1):
            last = k
            r, q = bmc_step(client, unroller, k, queries)
            if r.is_sat:
                return Verdict(Status.FALSE, k, "bmc", counterexample=Counterexample(k - 1, r.model, q.maps), queries=queries)
            if r.status is SatStatus.UNKNOWN:
                return Verdict(Status.UNKNOWN, k, "bmc", reason="solver-unknown", queries=queries)
    except SolverError as exc:
        return Verdict(Status.UNKNOWN, last, "bmc", reason=f"{type(exc).__name__}: {exc}", queries=queries)
    if sys.loop_free:
        return Verdict(Status.TRUE, 1, "bmc", queries=queries)
    return Verdict(Status.UNKNOWN, k_max, "bmc", reason="bound-exhausted", queries=queries)

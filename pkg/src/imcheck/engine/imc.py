"""Interpolation-based model checking on the summarized single-loop system."""

from __future__ import annotations

from ..formula import TRUE, SsaMap, UnboundVariable, Var, conj, disj, exists, free_vars, neg, shift_variable_index
from ..formula.smtlib import UnsupportedInterpolant
from ..solver import SolverClient, SolverError, Status as SatStatus
from ..transform.lbe import SummarizedSystem
from .bmc import bmc_step, run_bmc
from .unroll import Unroller
from .verdict import Certificate, Counterexample, Status, Verdict


class ImcState:
    """Current image and starting states inside one fixed-point computation."""

    def __init__(self, prefix, generation: set):
        self.prefix = prefix
        self.generation = generation
        self.image = prefix
        self.start = prefix
        self.iteration = 0
        self._itps: list = []

    def closed_image(self):
        """The image with the prefix's internal variables quantified away."""
        inner = set(free_vars(self.prefix)) - self.generation
        return disj(exists(inner, self.prefix), *self._itps)

    def extend(self, itp) -> None:
        self.image = disj(self.image, itp)
        self._itps.append(itp)
        self.start = itp
        self.iteration += 1


def reach_fixed_point(
    prefix,
    loop,
    suffix,
    client: SolverClient,
    m0: SsaMap,
    m1: SsaMap,
    state_vars,
    direction: str = "backward",
    trace: list | None = None,
    k: int = 0,
):
    """Return the fixed-point image, or None if the error became reachable.

    A None result may be a spurious alarm caused by over-approximation; the
    caller resolves it with the exact query at the next bound.
    """
    gen0 = {Var(v, m0[v]) for v in state_vars}
    src = {v: m1[v] for v in state_vars}
    dst = {v: m0[v] for v in state_vars}
    st = ImcState(prefix, gen0)
    while True:
        r = client.check_sat(conj(st.start, loop, suffix), model=False)
        if r.status is SatStatus.UNKNOWN:
            raise SolverError("solver answered unknown inside the fixed-point loop")
        if r.is_sat:
            if trace is not None:
                trace.append({"k": k, "iteration": st.iteration, "event": "reach-error"})
            return None
        itp = client.get_interpolant(conj(st.start, loop), suffix, direction)
        itp = shift_variable_index(itp, dst, src)
        if client.is_unsat(conj(itp, neg(st.closed_image()))):
            if trace is not None:
                trace.append({"k": k, "iteration": st.iteration, "event": "fixed-point", "image": st.image, "itp": itp})
            return st.image
        before = st.image
        st.extend(itp)
        if trace is not None:
            trace.append({"k": k, "iteration": st.iteration, "event": "extend", "before": before, "image": st.image, "itp": itp})


def bounded_safety(unroller: Unroller, m0: SsaMap, state_vars, depth: int):
    """States at generation m0 that cannot reach ERROR in fewer than ``depth`` steps."""
    gen = {Var(v, m0[v]) for v in state_vars}
    parts = []
    for j in range(depth):
        path, m = [], m0
        for _ in range(j):
            t, m = unroller.trans(m)
            path.append(t)
        path.append(unroller.error(m))
        f = conj(*path)
        parts.append(neg(exists(set(free_vars(f)) - gen, f)))
    return conj(*parts)


def _certificate(client, unroller, image, m0, state_vars, k) -> Certificate:
    """The fixed point, strengthened when it still meets ERROR.

    The fixed point only excludes paths reaching ERROR in exactly k-1 steps.
    Conjoining "no ERROR within k-2 steps" keeps it inductive (a successor
    reaching ERROR in j steps means its predecessor does so in j+1) and
    makes it disjoint from ERROR; BMC already showed that INIT satisfies it.
    """
    gen = {Var(v, m0[v]) for v in state_vars}
    closed = exists(set(free_vars(image)) - gen, image)
    if client.is_unsat(conj(closed, unroller.error(m0))):
        return Certificate.make(image, m0, state_vars)
    return Certificate.make(conj(image, bounded_safety(unroller, m0, state_vars, k - 1)), m0, state_vars)


def run_imc(sys: SummarizedSystem, k_max: int, client: SolverClient, direction: str = "backward") -> Verdict:
    if k_max < 1:
        raise ValueError("k_max must be positive")
    if sys.loop_free:
        v = run_bmc(sys, 1, client)
        v.algorithm = "imc"
        if v.status is Status.TRUE:
            # nothing is reachable at the (absent) loop head
            v.certificate = Certificate.make(TRUE, SsaMap(), ())
        return v
    unroller = Unroller(sys)
    queries: list = []
    trace: list = []
    k = 0
    try:
        for k in range(1, k_max + 1):
            r, q = bmc_step(client, unroller, k, queries)
            if r.is_sat:
                return Verdict(
                    Status.FALSE, k, "imc", counterexample=Counterexample(k - 1, r.model, q.maps), queries=queries, trace=trace
                )
            if r.status is SatStatus.UNKNOWN:
                return Verdict(Status.UNKNOWN, k, "imc", reason="solver-unknown", queries=queries, trace=trace)
            if k == 1:
                continue
            image = reach_fixed_point(
                q.prefix, q.loop, q.suffix, client, q.maps[0], q.maps[1], sys.state_vars, direction, trace, k
            )
            if image is not None:
                cert = _certificate(client, unroller, image, q.maps[0], sys.state_vars, k)
                return Verdict(Status.TRUE, k, "imc", certificate=cert, queries=queries, trace=trace)
    except (SolverError, UnsupportedInterpolant, UnboundVariable) as exc:
        return Verdict(Status.UNKNOWN, k, "imc", reason=f"{type(exc).__name__}: {exc}", queries=queries, trace=trace)
    return Verdict(Status.UNKNOWN, k_max, "imc", reason="bound-exhausted", queries=queries, trace=trace)

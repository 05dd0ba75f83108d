"""Solver-checked certificates for TRUE verdicts."""

from __future__ import annotations

from dataclasses import dataclass

from ..formula import IndexPool, all_vars, conj, neg
from ..solver import SolverClient, SolverError
from ..transform.lbe import SummarizedSystem
from .unroll import Unroller
from .verdict import Certificate

PASS, FAIL, UNCERTIFIED = "pass", "fail", "uncertified"


@dataclass
class CertificateResult:
    status: str
    reason: str = ""
    failed: tuple = ()

    @property
    def passed(self) -> bool:
        return self.status == PASS


def _pool_avoiding(cert: Certificate) -> IndexPool:
    # bound variables too: a fresh index equal to a bound one would be captured
    pool = IndexPool()
    for v in all_vars(cert.formula):
        pool.reserve(v)
    return pool


def check_certificate(sys: SummarizedSystem, cert: Certificate, client: SolverClient) -> CertificateResult:
    """Check that the certificate contains INIT, is inductive and excludes ERROR.

    (a) INIT -> F, (b) F ∧ TRANS ∧ ¬F' unsat, (c) F ∧ ERROR unsat and the
    pre-loop error paths are infeasible. A definite failure of (a) or (b)
    is a fail; a failure of (c) alone, or an inconclusive solver answer,
    leaves the verdict uncertified.
    """
    u = Unroller(sys, _pool_avoiding(cert))
    failed = []
    try:
        init, m_init = u.init()
        if not client.is_unsat(conj(init, neg(cert.at(m_init)))):
            failed.append("a")
        z = u.zero()
        here = cert.at(z)
        trans, m_next = u.trans(z)
        if not client.is_unsat(conj(here, trans, neg(cert.at(m_next)))):
            failed.append("b")
        if not client.is_unsat(conj(here, u.error(z))) or not client.is_unsat(u.pre_error()):
            failed.append("c")
    except SolverError as exc:
        return CertificateResult(UNCERTIFIED, f"inconclusive: {exc}", tuple(failed))
    if "a" in failed or "b" in failed:
        return CertificateResult(FAIL, "condition(s) " + ",".join(failed) + " violated", tuple(failed))
    if failed:
        return CertificateResult(UNCERTIFIED, "certificate is not directly safe (c)", tuple(failed))
    return CertificateResult(PASS)

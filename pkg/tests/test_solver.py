import importlib.util
import sys

import pytest

from imcheck.engine import Unroller
from imcheck.formula import FALSE, TRUE, Add, Cmp, IntConst, Mod, Var, conj, eq, free_vars, neg, to_smtlib
from imcheck.solver import (
    ContractViolation,
    InterpolationUnsupported,
    NotUnsat,
    SolverClient,
    SolverConfig,
    SolverCrash,
    SolverTimeout,
    Status,
)

from conftest import CORPUS, system_of

x0, x1 = Var("x", 0), Var("x", 1)
r0, r1 = Var("r", 0), Var("r", 1)

EVEN_A = conj(eq(x0, IntConst(0)), neg(eq(r0, IntConst(0))), eq(x1, Add((x0, IntConst(2)))))
EVEN_B = conj(eq(r1, IntConst(0)), neg(eq(Mod(x1, 2), IntConst(0))))


def contract_holds(client, a, b, c):
    return (
        client.is_unsat(conj(a, neg(c)))
        and client.is_unsat(conj(c, b))
        and free_vars(c) <= free_vars(a) & free_vars(b)
    )


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        SolverConfig(timeout_ms=0)
    with pytest.raises(ValueError):
        SolverConfig(dialect="c")


def test_contradiction(client):
    assert client.check_sat(conj(eq(x0, IntConst(0)), neg(eq(x0, IntConst(0))))).status is Status.UNSAT


def test_even_bmc_query_at_two_is_unsat(client):
    assert client.is_unsat(conj(EVEN_A, EVEN_B))


def test_model(client):
    r = client.check_sat(conj(eq(x0, IntConst(0)), eq(x1, Add((x0, IntConst(2)))), eq(x1, IntConst(2))))
    assert r.is_sat and r.model == {x0: 0, x1: 2}


@pytest.mark.parametrize("dialect", ["a", "b"])
@pytest.mark.parametrize("direction", ["forward", "backward"])
def test_even_interpolant(dialect, direction):
    with SolverClient(SolverConfig(dialect=dialect)) as c:
        itp = c.get_interpolant(EVEN_A, EVEN_B, direction)
        assert free_vars(itp) == {x1}
        assert contract_holds(c, EVEN_A, EVEN_B, itp)
        # the bundled server finds the parity fact itself
        assert c.is_unsat(conj(itp, neg(eq(Mod(x1, 2), IntConst(0)))))
        assert c.stats.validated == 1 and c.stats.violations == 0


def test_vacuous_partition(client):
    itp = client.get_interpolant(FALSE, eq(x0, IntConst(3)), "forward")
    assert client.is_unsat(itp)


def test_satisfiable_partition(client):
    with pytest.raises(NotUnsat):
        client.get_interpolant(eq(x0, IntConst(1)), eq(x0, IntConst(1)))


def test_corpus_partitions_satisfy_contract(shared_client):
    """Every unsat BMC query at k = 2..4 split after the first TRANS copy."""
    checked = 0
    for path in sorted(CORPUS.glob("*.mc")):
        sys_ = system_of(path.read_text())
        if sys_.loop_free:
            continue
        u = Unroller(sys_)
        for k in range(2, 5):
            q = u.query(k)
            a, b = conj(q.prefix, q.loop), q.suffix
            if not shared_client.is_unsat(conj(a, b)):
                break
            for direction in ("forward", "backward"):
                c = shared_client.get_interpolant(a, b, direction)
                assert contract_holds(shared_client, a, b, c), (path.name, k, direction, to_smtlib(c))
                checked += 1
    assert checked >= 40
    assert shared_client.stats.violations == 0


def test_violation_is_detected(client, monkeypatch):
    monkeypatch.setattr(client, "_raw_interpolant", lambda a, b: TRUE)
    with pytest.raises(ContractViolation):
        client.get_interpolant(EVEN_A, EVEN_B, "forward")
    assert client.stats.violations == 1


def test_missing_solver_binary():
    with SolverClient(SolverConfig(cmd=("/nonexistent/solver",))) as c:
        with pytest.raises(SolverCrash):
            c.check_sat(TRUE)


def test_solver_that_exits_immediately():
    with SolverClient(SolverConfig(cmd=(sys.executable, "-c", "pass"))) as c:
        with pytest.raises(SolverCrash):
            c.check_sat(TRUE)


def test_hanging_solver_times_out():
    cmd = (sys.executable, "-c", "import time; time.sleep(60)")
    with SolverClient(SolverConfig(cmd=cmd, timeout_ms=300)) as c:
        with pytest.raises(SolverTimeout):
            c.check_sat(TRUE)


def test_respawn_after_crash(client):
    assert client.check_sat(eq(x0, IntConst(1))).is_sat
    client.proc.kill()
    client.proc.wait()
    assert client.check_sat(eq(x0, IntConst(1))).is_sat
    assert client.stats.respawns == 1


def test_transcript(tmp_path):
    log = tmp_path / "t.smt2"
    with SolverClient(transcript_path=str(log)) as c:
        c.check_sat(eq(x0, IntConst(1)))
    text = log.read_text()
    assert "(check-sat)" in text and "(= x!0 1)" in text


def test_model_enumeration(client):
    f = conj(eq(Mod(x0, 3), IntConst(1)), neg(eq(x0, IntConst(4))))
    got = client.enumerate_models(f, [x0], limit=3)
    assert len(got) == 3 and all(v[0] % 3 == 1 and v[0] != 4 for v in got)
    bounded = conj(eq(Mod(x0, 3), IntConst(1)), Cmp(">=", x0, IntConst(-3)), Cmp("<=", x0, IntConst(7)))
    assert client.enumerate_models(bounded, [x0]) == {(-2,), (1,), (4,), (7,)}


@pytest.mark.skipif(importlib.util.find_spec("cvc5") is None, reason="cvc5 bindings not installed")
def test_cvc5_driver_interpolates():
    cmd = (sys.executable, "-m", "imcheck.solver.cvc5_driver")
    with SolverClient(SolverConfig(cmd=cmd, dialect="a")) as c:
        for direction in ("forward", "backward"):
            itp = c.get_interpolant(EVEN_A, EVEN_B, direction)
            assert contract_holds(c, EVEN_A, EVEN_B, itp)


@pytest.mark.skipif(importlib.util.find_spec("cvc5") is None, reason="cvc5 bindings not installed")
def test_cvc5_lacks_named_partition_dialect():
    cmd = (sys.executable, "-m", "imcheck.solver.cvc5_driver")
    with SolverClient(SolverConfig(cmd=cmd, dialect="b")) as c:
        with pytest.raises(InterpolationUnsupported):
            c.get_interpolant(EVEN_A, EVEN_B, "forward")

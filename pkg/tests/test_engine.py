import pytest

from imcheck.engine import (
    Certificate,
    Status,
    Unroller,
    check_certificate,
    reach_fixed_point,
    run_bmc,
    run_imc,
    run_kinduction,
)
from imcheck.engine.imc import ImcState
from imcheck.formula import FALSE, TRUE, And, IntConst, Mod, Or, SsaMap, Var, disj, eq, implies
from imcheck.harness.oracle import interpret_bounded
from imcheck.harness.runner import build_system

from conftest import CORPUS, EVEN, system_of

COUNT3 = "int x; x = 0; while (nondet()) { x = x + 1; } assert(x != 3);"
COUNT_LT2 = "int x; x = 0; while (nondet()) { x = x + 1; } assert(x < 2);"
STEP2 = "int x; x = 0; while (nondet()) { x = x + 2; } assert(x != 7);"
ZERO = "int x; x = 0; while (nondet()) { x = x + 0; } assert(x == 0);"
IMMEDIATE = "int x; x = 0; while (nondet()) { x = x + 1; } ERROR: return;"


def test_bmc_even_exhausts_bound(client):
    v = run_bmc(system_of(EVEN), 5, client)
    assert v.status is Status.UNKNOWN and v.reason == "bound-exhausted"
    assert [q["k"] for q in v.queries] == [1, 2, 3, 4, 5]


def test_bmc_counter(client):
    sys_ = system_of(COUNT3)
    v = run_bmc(sys_, 5, client)
    assert v.status is Status.FALSE and v.k_reached == 4 and v.counterexample.depth == 3
    assert v.counterexample.head_state(3, sys_.state_vars)["x"] == 3
    assert interpret_bounded(build_system(COUNT3).single, 10, 10).min_depth == 3


def test_bmc_loop_free(client):
    v = run_bmc(system_of("int x; x = 1; assert(x == 2);"), 5, client)
    assert v.status is Status.FALSE and v.k_reached == 1 and len(v.queries) == 1


def test_k_convention():
    u = Unroller(system_of(EVEN))
    for k in range(1, 7):
        q = u.query(k)
        assert q.trans_instances == k - 1 == len(q.loops)
        assert len(q.maps) == k


def test_imc_even(client):
    sys_ = system_of(EVEN)
    v = run_imc(sys_, 5, client)
    assert v.status is Status.TRUE and v.k_reached <= 5
    assert check_certificate(sys_, v.certificate, client).passed
    x0 = Var("x", 0)
    parity = eq(Mod(x0, 2), IntConst(0))
    assert client.is_valid(implies(v.certificate.at({"x": 0}), parity))


def test_imc_immediate_violation_skips_interpolation(client):
    v = run_imc(system_of(IMMEDIATE), 5, client)
    assert v.status is Status.FALSE and v.k_reached == 1
    assert client.stats.interpolants == 0


def test_imc_step_by_two(client):
    sys_ = system_of(STEP2)
    v = run_imc(sys_, 10, client)
    assert v.status is Status.TRUE
    assert check_certificate(sys_, v.certificate, client).passed
    oracle = interpret_bounded(build_system(STEP2).single, 40, 20)
    assert not oracle.error_reachable


def test_imc_counter_reports_exact_depth(client):
    v = run_imc(system_of(COUNT_LT2), 10, client)
    assert v.status is Status.FALSE and v.k_reached == 3 and v.counterexample.depth == 2


def test_fixed_point_spurious_alarm_at_k2(client):
    sys_ = system_of(COUNT_LT2)
    q = Unroller(sys_).query(2)
    assert client.is_unsat(q.formula)
    trace = []
    image = reach_fixed_point(q.prefix, q.loop, q.suffix, client, q.maps[0], q.maps[1], sys_.state_vars, trace=trace)
    assert image is None and trace[-1]["event"] == "reach-error"


def test_fixed_point_with_unreachable_head(client):
    sys_ = system_of(EVEN)
    q = Unroller(sys_).query(2)
    image = reach_fixed_point(FALSE, q.loop, q.suffix, client, q.maps[0], q.maps[1], sys_.state_vars)
    assert image == FALSE


@pytest.mark.parametrize("direction", ["forward", "backward"])
def test_image_monotone_and_start_in_image(client, direction):
    for name in ("even.mc", "bounded_count.mc", "sequential_safe.mc"):
        v = run_imc(system_of((CORPUS / name).read_text()), 10, client, direction)
        assert v.status is Status.TRUE
        extends = [t for t in v.trace if t["event"] == "extend"]
        assert extends
        for t in extends:
            assert client.is_valid(implies(t["before"], t["image"]))
            assert client.is_valid(implies(t["itp"], t["image"]))


def test_imc_state_shape():
    x0 = Var("x", 0)
    st = ImcState(eq(x0, IntConst(0)), {x0})
    st.extend(eq(x0, IntConst(2)))
    assert isinstance(st.image, Or) and st.image.args[0] == st.prefix
    assert st.start == eq(x0, IntConst(2)) and st.iteration == 1


def test_kinduction_examples(client):
    v = run_kinduction(system_of(ZERO), 5, client)
    assert v.status is Status.TRUE and v.k_reached == 1
    v = run_kinduction(system_of(EVEN), 5, client)
    assert v.status is Status.TRUE and v.k_reached <= 2
    v = run_kinduction(system_of(COUNT3), 5, client)
    assert v.status is Status.FALSE and v.k_reached == 4


def test_certificate_examples(client):
    sys_ = system_of(EVEN)
    x0 = Var("x", 0)
    zero = SsaMap({"x": 0})
    parity_cert = Certificate.make(disj(eq(x0, IntConst(0)), eq(Mod(x0, 2), IntConst(0))), zero, ("x",))
    assert check_certificate(sys_, parity_cert, client).passed
    coarse = check_certificate(sys_, Certificate.make(TRUE, zero, ("x",)), client)
    assert not coarse.passed and coarse.failed == ("c",)
    too_small = check_certificate(sys_, Certificate.make(eq(x0, IntConst(0)), zero, ("x",)), client)
    assert too_small.status == "fail" and "b" in too_small.failed


def test_certificate_mutations(client):
    """Dropping an image disjunct either breaks the certificate or changes nothing."""
    broken = 0
    for name in ("even.mc", "bounded_count.mc", "diamond_body.mc", "lockstep.mc", "toggle.mc", "sequential_safe.mc"):
        sys_ = system_of((CORPUS / name).read_text())
        v = run_imc(sys_, 10, client)
        cert = v.certificate
        image = cert.formula.args[0] if isinstance(cert.formula, And) else cert.formula
        assert isinstance(image, Or), name
        for i in range(len(image.args)):
            mutant = Certificate(disj(*(a for j, a in enumerate(image.args) if j != i)), cert.state_map, cert.state_vars)
            r = check_certificate(sys_, mutant, client)
            if r.passed:
                z = sys_.zero_map()
                assert client.is_valid(implies(cert.at(z), mutant.at(z))), (name, i)
            else:
                broken += 1
    assert broken >= 6

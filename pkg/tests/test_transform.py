import networkx as nx
import pytest

from imcheck.engine import Unroller
from imcheck.formula import IndexPool, IntConst, SsaMap, Var, conj, eq, free_vars, instantiate, to_smtlib
from imcheck.frontend import AssignOp, build_cfa, parse
from imcheck.harness.oracle import interpret_bounded, loop_heads as oracle_heads
from imcheck.transform import PC, UnsupportedShape, large_block_encode, loop_heads, single_loop_transform, system_to_smtlib

from conftest import CORPUS, EVEN

SEQUENTIAL = """
int x; int y;
while (x < 3) { x = x + 1; }
while (y < 2) { y = y + 1; }
assert(x + y != 5);
"""

NESTED = """
int i; int j;
while (i < 3) {
  j = 0;
  while (j < 3) {
    if (i + j == 4) { ERROR: return; }
    j = j + 1;
  }
  i = i + 1;
}
"""

DIAMOND = """
int x; int n;
while (nondet()) {
  if (nondet()) { x = x + 1; } else { x = x + 2; }
}
assert(x >= 0);
"""


def cfa_of(src):
    return build_cfa(parse(src))


def test_single_loop_input_unchanged():
    cfa = cfa_of(EVEN)
    assert single_loop_transform(cfa) == cfa


def test_sequential_loops_dispatch():
    cfa = cfa_of(SEQUENTIAL)
    assert len(loop_heads(cfa)) == 2
    out = single_loop_transform(cfa)
    out.check()
    assert len(loop_heads(out)) == 1
    pcs = {e.op.expr.value for e in out.edges if isinstance(e.op, AssignOp) and e.op.var == PC}
    assert pcs <= {0, 1, 2} and len(pcs) >= 2
    assert interpret_bounded(cfa, 20, 6).error_depths == interpret_bounded(out, 20, 6).error_depths


def test_nested_loops_error_reachable_in_both():
    cfa = cfa_of(NESTED)
    out = single_loop_transform(cfa)
    assert len(loop_heads(out)) == 1
    before, after = interpret_bounded(cfa, 40, 6), interpret_bounded(out, 40, 6)
    assert before.exhaustive and after.exhaustive
    assert before.error_reachable and after.error_reachable
    assert before.min_depth == after.min_depth


def test_transform_preserves_error_depths_on_corpus():
    for path in sorted(CORPUS.glob("*.mc")):
        cfa = cfa_of(path.read_text())
        out = single_loop_transform(cfa)
        assert len(oracle_heads(out)) <= 1, path.name
        a, b = interpret_bounded(cfa, 12, 12), interpret_bounded(out, 12, 12)
        assert a.error_depths == b.error_depths, path.name


def test_every_cycle_passes_the_head():
    for path in sorted(CORPUS.glob("*.mc")):
        out = single_loop_transform(cfa_of(path.read_text()))
        heads = loop_heads(out)
        if not heads:
            continue
        # removing the head must leave an acyclic graph
        g = nx.DiGraph((e.source, e.target) for e in out.edges if heads[0] not in (e.source, e.target))
        assert nx.is_directed_acyclic_graph(g), path.name


def test_lbe_rejects_multiple_heads():
    with pytest.raises(UnsupportedShape):
        large_block_encode(cfa_of(SEQUENTIAL))


def test_even_templates():
    sys = large_block_encode(single_loop_transform(cfa_of(EVEN)))
    assert sys.state_vars == ("x",)
    assert to_smtlib(sys.init.body) == "(= x!1 0)"
    assert to_smtlib(sys.trans.body) == "(and (not (= __nd0!1 0)) (= x!1 (+ x!0 2)))"
    assert to_smtlib(sys.error.body) == "(and (= __nd0!1 0) (not (= (mod x!0 2) 0)))"


def test_loop_free_fold():
    sys = large_block_encode(cfa_of("int x; x = 1; assert(x == 1);"))
    assert sys.loop_free and sys.trans.is_false
    assert to_smtlib(sys.error.body) == "(and (= x!1 1) (not (= x!1 1)))"


def test_trans_free_vars_are_adjacent_generations():
    for path in sorted(CORPUS.glob("*.mc")):
        sys = large_block_encode(single_loop_transform(cfa_of(path.read_text())))
        if sys.loop_free:
            continue
        pool = IndexPool()
        m0 = SsaMap.zero(sys.variables)
        t, m1 = instantiate(sys.trans, m0, pool)
        boundary = {Var(v, m0[v]) for v in sys.state_vars} | {Var(v, m1[v]) for v in sys.state_vars}
        internal = free_vars(t) - boundary
        # anything else is a temporary created inside this block
        assert all(v.index != m0[v.name] for v in internal), path.name
        e, _ = instantiate(sys.error, m0, pool)
        gen0 = {v for v in free_vars(e) if v.index == 0}
        assert {v.name for v in gen0} <= set(sys.state_vars), path.name


def test_diamond_successor_relation(shared_client):
    sys = large_block_encode(single_loop_transform(cfa_of(DIAMOND)))
    assert sys.state_vars == ("x",)
    pool = IndexPool()
    m0 = SsaMap.zero(sys.variables)
    t, m1 = instantiate(sys.trans, m0, pool)
    pre, post = Var("x", m0["x"]), Var("x", m1["x"])
    for x in range(-3, 4):
        got = shared_client.enumerate_models(conj(eq(pre, IntConst(x)), t), [post])
        assert got == {(x + 1,), (x + 2,)}


def test_error_equivalence_small_depths(shared_client):
    for name in ("count_unsafe.mc", "counter_lt2.mc", "diamond_unsafe.mc", "even.mc", "nested_unsafe.mc"):
        src = (CORPUS / name).read_text()
        single = single_loop_transform(cfa_of(src))
        sys = large_block_encode(single)
        oracle = interpret_bounded(single, 6, 20, record_depths=6)
        u = Unroller(sys)
        for i in range(5):
            sat = shared_client.check_sat(u.query(i + 1).formula, model=False).is_sat
            assert sat == (i in oracle.error_depths), (name, i)


def test_system_dump():
    sys = large_block_encode(single_loop_transform(cfa_of(EVEN)))
    text = system_to_smtlib(sys)
    for name in ("INIT", "TRANS", "ERROR"):
        assert f"(define-fun {name} () Bool" in text

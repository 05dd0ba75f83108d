import itertools

import pytest
from hypothesis import given, settings, strategies as st

from imcheck.frontend import (
    AssumeOp,
    HavocOp,
    MiniCSyntaxError,
    MiniCTypeError,
    NoErrorLocation,
    build_cfa,
    parse,
    unparse,
)
from imcheck.frontend.ast import ErrorLabel, If, While, count_nondet, walk
from imcheck.harness.oracle import interpret_bounded, run_ast, run_cfa

from conftest import CORPUS, EVEN


def test_even_ast_shape():
    prog = parse(EVEN)
    nodes = list(walk(prog))
    assert prog.decls == ("x",)
    assert sum(isinstance(n, While) for n in nodes) == 1
    assert sum(isinstance(n, If) for n in nodes) == 1
    assert sum(isinstance(n, ErrorLabel) for n in nodes) == 1


def test_minimal_program():
    prog = parse("int x; x = 0; return;")
    assert prog.decls == ("x",)
    assert len(prog.body) == 2


def test_syntax_error_position():
    with pytest.raises(MiniCSyntaxError) as info:
        parse("int x; x = ;")
    assert (info.value.line, info.value.col) == (1, 12)


@pytest.mark.parametrize(
    "src",
    [
        "int x; y = 1;",
        "int x; int x; x = 1;",
        "int x; x = (x < 1);",
        "int x; if (x + 1) { x = 0; }",
        "int x; x = x % 0;",
        "int x; x = x / -2;",
    ],
)
def test_type_errors(src):
    with pytest.raises(MiniCTypeError):
        parse(src)


def test_nondet_only_where_allowed():
    with pytest.raises(MiniCTypeError):
        parse("int x; x = nondet() + 1;")


def test_even_cfa_branches():
    cfa = build_cfa(parse(EVEN))
    cfa.check()
    assumes = [e for e in cfa.edges if isinstance(e.op, AssumeOp)]
    mod_branch = [e for e in assumes if "%" in str(e.op)]
    assert len(mod_branch) == 2 and len({e.source for e in mod_branch}) == 1
    nd_branch = [e for e in assumes if "__nd0" in str(e.op)]
    assert len(nd_branch) == 2 and len({e.source for e in nd_branch}) == 1
    assert len(cfa.locations) == 7
    assert sum(isinstance(e.op, HavocOp) for e in cfa.edges) == 1


def test_straight_line_error_label():
    cfa = build_cfa(parse("int x; ERROR: return;"))
    (first,) = cfa.out_edges(cfa.initial)
    assert first.target in cfa.errors


def test_assert_desugars_to_assume_pair():
    cfa = build_cfa(parse("int x; x = 1; assert(x >= 0);"))
    (err,) = cfa.errors
    (into,) = cfa.in_edges(err)
    assert str(into.op) == "[(x < 0)]"
    assert not interpret_bounded(cfa, 5, 5).error_reachable


def test_no_error_location():
    with pytest.raises(NoErrorLocation):
        build_cfa(parse("int x; x = 1;"))


def test_one_havoc_per_nondet():
    for path in sorted(CORPUS.glob("*.mc")):
        prog = parse(path.read_text())
        cfa = build_cfa(prog)
        havocs = sum(isinstance(e.op, HavocOp) for e in cfa.edges)
        assert havocs == count_nondet(prog), path.name


def test_corpus_cfas_are_well_formed():
    for path in sorted(CORPUS.glob("*.mc")):
        build_cfa(parse(path.read_text())).check()


def test_corpus_round_trip():
    for path in sorted(CORPUS.glob("*.mc")):
        prog = parse(path.read_text())
        assert parse(unparse(prog)) == prog, path.name


# random programs over a small grammar

NAMES = ("a", "b")

exprs = st.recursive(
    st.one_of(st.integers(-3, 3).map(str), st.sampled_from(NAMES)),
    lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from(["+", "-"]), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(inner, st.sampled_from(["%", "/"]), st.integers(1, 3)).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(st.integers(-2, 2), inner).map(lambda t: f"({t[0]} * {t[1]})"),
    ),
    max_leaves=4,
)
atoms = st.tuples(exprs, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), exprs).map(lambda t: f"{t[0]} {t[1]} {t[2]}")
conds = st.recursive(
    st.one_of(atoms, st.just("nondet()")),
    lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from(["&&", "||"]), inner).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})"),
        inner.map(lambda c: f"!({c})"),
    ),
    max_leaves=3,
)


def _stmts(depth):
    simple = st.one_of(
        st.tuples(st.sampled_from(NAMES), exprs).map(lambda t: f"{t[0]} = {t[1]};"),
        st.sampled_from(NAMES).map(lambda n: f"{n} = nondet(); assume({n} >= 0 && {n} <= 2);"),
        conds.map(lambda c: f"assert({c});"),
        conds.map(lambda c: f"assume({c});"),
        st.just("ERROR: return;"),
    )
    if depth == 0:
        return simple
    inner = st.lists(_stmts(depth - 1), min_size=1, max_size=3).map(" ".join)
    return st.one_of(
        simple,
        st.tuples(conds, inner, inner).map(lambda t: f"if ({t[0]}) {{ {t[1]} }} else {{ {t[2]} }}"),
        st.tuples(conds, inner).map(lambda t: f"if ({t[0]}) {{ {t[1]} }}"),
        st.tuples(st.sampled_from(NAMES), inner).map(
            lambda t: f"while ({t[0]} < 2) {{ {t[1]} {t[0]} = {t[0]} + 1; }}"
        ),
    )


programs = st.lists(_stmts(2), min_size=1, max_size=4).map(lambda ss: "int a; int b; " + " ".join(ss) + " assert(a > -100);")


@settings(max_examples=60, deadline=None)
@given(programs)
def test_round_trip_random(src):
    prog = parse(src)
    assert parse(unparse(prog)) == prog


@settings(max_examples=60, deadline=None)
@given(programs)
def test_path_preservation(src):
    prog = parse(src)
    cfa = build_cfa(prog)
    # enumerate every input sequence up to a small length from {0, 1, 2}
    for length in range(4):
        for seq in itertools.product((0, 1, 2), repeat=length):
            a = run_ast(prog, seq, fuel=400)
            c = run_cfa(cfa, seq, prog.decls, fuel=4000)
            if a.outcome == "diverged" or c.outcome == "diverged":
                continue
            assert (a.outcome, a.env, a.consumed) == (c.outcome, c.env, c.consumed), (src, seq)

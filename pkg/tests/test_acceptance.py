"""Acceptance checks, one per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line to the
terminal (also under capture) before asserting. Tolerances are pinned in
the constants below.
"""

import time

import networkx as nx
import pytest

from imcheck.engine import Status, Unroller, check_certificate, run_bmc, run_imc
from imcheck.formula import Var, conj, free_vars
from imcheck.harness.oracle import interpret_bounded, loop_heads
from imcheck.harness.runner import Pipeline, RunConfig, build_system, run_task
from imcheck.harness.tasks import discover
from imcheck.solver import SolverClient, SolverConfig

from conftest import CORPUS

EVEN_MAX_K = 5
EVEN_TIME_S = 10.0
CERTIFIED_RATIO = 0.90
LBE_DEPTH = 4
LBE_TIME_S = 60.0
ORACLE_STEPS = 40
ORACLE_DOMAIN = 50
ALGORITHMS = ("bmc", "kind", "imc-forward", "imc-backward")
LBE_TASKS = ("bounded_count.mc", "toggle.mc", "lockstep_unsafe.mc", "input_bounded_unsafe.mc", "nested_safe.mc")


def report(pytestconfig, n, ok, detail):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}"
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n" + line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus_run():
    """Every corpus task under every algorithm, with pipelines kept."""
    cfg = RunConfig(validate_itp=True)
    runs = {}
    for task in discover(CORPUS):
        for alg in ALGORITHMS:
            keep = Pipeline()
            runs[task.name, alg] = (task, run_task(task, alg, cfg, keep=keep), keep)
    return runs


def shape_of(name, cfa):
    heads = loop_heads(cfa)
    if not heads:
        return "straight-line"
    if name.startswith("diamond"):
        return "diamond-body"
    if len(heads) == 1:
        return "single-loop"
    g = nx.DiGraph((e.source, e.target) for e in cfa.edges)
    sccs = [c for c in nx.strongly_connected_components(g) if len(c) > 1]
    return "nested-loop" if len(sccs) < len(heads) else "sequential-loop"


def test_criterion_1_even_golden(pytestconfig):
    sys_ = build_system((CORPUS / "even.mc").read_text()).system
    t0 = time.monotonic()
    with SolverClient(SolverConfig()) as c:
        v = run_imc(sys_, EVEN_MAX_K, c)
        cert = check_certificate(sys_, v.certificate, c) if v.certificate is not None else None
    elapsed = time.monotonic() - t0
    ok = v.status is Status.TRUE and cert is not None and cert.passed and v.k_reached <= EVEN_MAX_K and elapsed < EVEN_TIME_S
    report(pytestconfig, 1, ok, f"even: {v.status.value} at k={v.k_reached} (<= {EVEN_MAX_K}), certificate {cert and cert.status}, {elapsed:.2f} s (< {EVEN_TIME_S:g} s)")


def test_criterion_2_certificates(pytestconfig, corpus_run):
    tasks = discover(CORPUS)
    shapes = {shape_of(t.name, build_system(t.source()).cfa) for t in tasks}
    safe = sum(t.expected == "safe" for t in tasks)
    unsafe = sum(t.expected == "unsafe" for t in tasks)
    needed = {"straight-line", "single-loop", "sequential-loop", "nested-loop", "diamond-body"}
    proofs = [rec for (_, alg), (_, rec, _) in corpus_run.items() if alg.startswith("imc") and rec.status == "TRUE"]
    statuses = [rec.certificate_status for rec in proofs]
    passed = statuses.count("pass")
    failed = statuses.count("fail")
    # every proof is either certified or explicitly downgraded
    accounted = all(s in ("pass", "uncertified") for s in statuses)
    ratio = passed / len(proofs) if proofs else 0.0
    ok = (
        len(tasks) >= 20 and safe >= 10 and unsafe >= 10 and needed <= shapes
        and accounted and failed == 0 and ratio >= CERTIFIED_RATIO
    )
    report(
        pytestconfig, 2, ok,
        f"{len(tasks)} tasks ({safe} safe, {unsafe} unsafe, shapes {sorted(shapes)}); "
        f"{passed}/{len(proofs)} IMC proofs certified ({ratio:.0%} >= {CERTIFIED_RATIO:.0%}), {failed} fail",
    )


def test_criterion_3_replay(pytestconfig, corpus_run):
    alarms = [rec for _, rec, _ in corpus_run.values() if rec.status == "FALSE"]
    bad = [(rec.task, rec.algorithm, rec.replay) for rec in alarms if rec.replay != "ok"]
    report(pytestconfig, 3, alarms and not bad, f"{len(alarms) - len(bad)}/{len(alarms)} FALSE verdicts replay at the reported depth {bad or ''}")


def test_criterion_4_oracle_agreement(pytestconfig, corpus_run):
    compared, mismatches = 0, []
    for task in discover(CORPUS):
        single = build_system(task.source()).single
        oracle = interpret_bounded(single, ORACLE_STEPS, ORACLE_DOMAIN)
        if not oracle.exhaustive:
            continue
        compared += 1
        want = "FALSE" if oracle.error_reachable else "TRUE"
        for alg in ALGORITHMS:
            rec = corpus_run[task.name, alg][1]
            if rec.status != "UNKNOWN" and rec.status != want:
                mismatches.append((task.name, alg, rec.status, want))
        bmc = corpus_run[task.name, "bmc"][1]
        if bmc.status == "FALSE" and bmc.counterexample_depth != oracle.min_depth:
            mismatches.append((task.name, "bmc-depth", bmc.counterexample_depth, oracle.min_depth))
        if oracle.error_reachable and bmc.status != "FALSE":
            mismatches.append((task.name, "bmc-missed", bmc.status, oracle.min_depth))
    ok = compared >= 10 and not mismatches
    report(pytestconfig, 4, ok, f"{compared} oracle-exhaustive tasks (steps {ORACLE_STEPS}, domain ±{ORACLE_DOMAIN}), mismatches {mismatches}")


def test_criterion_5_contract(pytestconfig, corpus_run):
    imc = [rec for (_, alg), (_, rec, _) in corpus_run.items() if alg.startswith("imc")]
    violations = sum(rec.contract_violations for rec in imc)
    report(pytestconfig, 5, violations == 0, f"{violations} interpolant contract violations over {len(imc)} validated IMC runs")


def test_criterion_6_lbe_models(pytestconfig, shared_client):
    t0 = time.monotonic()
    mismatches, compared = [], 0
    for name in LBE_TASKS:
        b = build_system((CORPUS / name).read_text())
        sys_ = b.system
        oracle = interpret_bounded(b.single, LBE_DEPTH, ORACLE_DOMAIN, heads=[sys_.loop_head], record_depths=LBE_DEPTH)
        assert not oracle.truncated, name
        idx = [b.single.variables.index(v) for v in sys_.state_vars]
        u = Unroller(sys_)
        for i in range(LBE_DEPTH + 1):
            q = u.query(i + 1)
            proj = [Var(v, q.maps[i][v]) for v in sys_.state_vars]
            symbolic = shared_client.enumerate_models(conj(q.prefix, *q.loops), proj, limit=10000)
            explicit = {tuple(s[j] for j in idx) for s in oracle.head_states.get(i, ())}
            compared += 1
            if symbolic != explicit:
                mismatches.append((name, i, len(symbolic), len(explicit)))
    elapsed = time.monotonic() - t0
    ok = not mismatches and compared == len(LBE_TASKS) * (LBE_DEPTH + 1) and elapsed < LBE_TIME_S
    report(pytestconfig, 6, ok, f"{compared} (task, depth) state sets equal for i <= {LBE_DEPTH}, {elapsed:.1f} s (< {LBE_TIME_S:g} s) {mismatches or ''}")


def test_criterion_7_k_convention(pytestconfig, client):
    sys_ = build_system((CORPUS / "even.mc").read_text()).system
    v = run_bmc(sys_, 6, client)
    recorded = [(q["k"], q["trans_instances"]) for q in v.queries]
    # structurally: each TRANS copy defines one new generation of x
    u = Unroller(sys_)
    gens = [len({w.index for w in free_vars(u.query(k).formula) if w.name == "x"}) for k in range(1, 7)]
    ok = all(t == k - 1 for k, t in recorded) and len(recorded) == 6 and gens == list(range(1, 7))
    report(pytestconfig, 7, ok, f"recorded (k, TRANS copies) {recorded}; generations of x per query {gens}")


def test_criterion_8_directions_agree(pytestconfig, corpus_run):
    names = sorted({n for n, _ in corpus_run})
    differ = [n for n in names if corpus_run[n, "imc-forward"][1].status != corpus_run[n, "imc-backward"][1].status]
    fwd = sum(corpus_run[n, "imc-forward"][1].cpu_ms for n in names) / 1000
    bwd = sum(corpus_run[n, "imc-backward"][1].cpu_ms for n in names) / 1000
    report(pytestconfig, 8, not differ, f"{len(names) - len(differ)}/{len(names)} tasks agree; CPU forward {fwd:.1f} s, backward {bwd:.1f} s (observed only) {differ or ''}")


def test_criterion_9_consistency(pytestconfig, corpus_run):
    names = sorted({n for n, _ in corpus_run})
    contradictions = []
    for n in names:
        conclusive = {corpus_run[n, a][1].status for a in ALGORITHMS} - {"UNKNOWN"}
        if len(conclusive) > 1:
            contradictions.append(n)
    classes = [rec.classification for _, rec, _ in corpus_run.values()]
    wp, wa = classes.count("wrong-proof"), classes.count("wrong-alarm")
    depth_mismatch = [
        n for n in names
        if corpus_run[n, "bmc"][1].status == "FALSE"
        and any(corpus_run[n, a][1].counterexample_depth != corpus_run[n, "bmc"][1].counterexample_depth for a in ("imc-forward", "imc-backward"))
    ]
    ok = not contradictions and wp == 0 and wa == 0 and not depth_mismatch
    report(pytestconfig, 9, ok, f"{len(contradictions)} contradictory tasks, {wp} wrong proofs, {wa} wrong alarms, IMC/BMC depth mismatches {depth_mismatch}")

"""Running verification tasks and classifying their outcomes."""

from __future__ import annotations

import logging
import resource
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..engine import Status, Verdict, check_certificate, run_bmc, run_imc, run_kinduction
from ..frontend import MiniCError, NoErrorLocation, build_cfa, parse
from ..solver import DEFAULT_CMD, SolverClient, SolverConfig
from ..transform import UnsupportedShape, large_block_encode, single_loop_transform
from .oracle import replay_counterexample
from .tasks import Task, TaskError, load_task

log = logging.getLogger(__name__)

ALGORITHMS = ("bmc", "imc", "kind")
# bench also accepts IMC with an explicit interpolation direction
VARIANTS = {"imc-forward": ("imc", "forward"), "imc-backward": ("imc", "backward")}

CSV_COLUMNS = (
    "task",
    "algorithm",
    "status",
    "k_reached",
    "cpu_ms",
    "wall_ms",
    "certificate_status",
    "counterexample_depth",
    "expected",
    "classification",
)

CLASSES = ("correct-true", "correct-false", "wrong-proof", "wrong-alarm", "timeout", "inconclusive", "unchecked")


@dataclass(frozen=True)
class RunConfig:
    max_k: int = 10
    timeout_s: float = 60.0
    solver_cmd: tuple = DEFAULT_CMD
    dialect: str = "a"
    query_timeout_ms: int = 30000
    validate_itp: bool = True
    direction: str = "backward"
    debug_smt: str | None = None
    check_results: bool = True

    def solver_config(self) -> SolverConfig:
        return SolverConfig(tuple(self.solver_cmd), self.dialect, self.query_timeout_ms, self.validate_itp)


@dataclass
class Record:
    task: str
    algorithm: str
    status: str
    k_reached: int
    cpu_ms: float
    wall_ms: float
    certificate_status: str = ""
    counterexample_depth: int | None = None
    expected: str = "unknown"
    classification: str = "inconclusive"
    reason: str = ""
    replay: str = ""
    contract_violations: int = 0

    def row(self) -> dict:
        d = asdict(self)
        return {c: ("" if d[c] is None else d[c]) for c in CSV_COLUMNS}


@dataclass
class Pipeline:
    """Intermediate artifacts of one run, for inspection and tests."""

    program: object = None
    cfa: object = None
    single: object = None
    system: object = None
    verdict: Verdict | None = None


def classify(status: str, expected: str, reason: str = "") -> str:
    if status == "UNKNOWN":
        return "timeout" if "timeout" in reason.lower() else "inconclusive"
    if expected == "unknown":
        return "unchecked"
    if status == "TRUE":
        return "correct-true" if expected == "safe" else "wrong-proof"
    return "correct-false" if expected == "unsafe" else "wrong-alarm"


def build_system(source: str) -> Pipeline:
    """Front half of the pipeline: parse, CFA, single-loop form, LBE."""
    p = Pipeline()
    p.program = parse(source)
    p.cfa = build_cfa(p.program)
    p.single = single_loop_transform(p.cfa)
    p.system = large_block_encode(p.single)
    return p


def run_engine(system, algorithm: str, max_k: int, client: SolverClient, direction: str = "backward") -> Verdict:
    if algorithm == "bmc":
        return run_bmc(system, max_k, client)
    if algorithm == "kind":
        return run_kinduction(system, max_k, client)
    if algorithm == "imc":
        return run_imc(system, max_k, client, direction)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _children_cpu() -> float:
    r = resource.getrusage(resource.RUSAGE_CHILDREN)
    return r.ru_utime + r.ru_stime


def _transcript_path(cfg: RunConfig, task: Task, algorithm: str) -> str | None:
    if not cfg.debug_smt:
        return None
    d = Path(cfg.debug_smt)
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{task.path.stem}.{algorithm}.smt2"
    path.unlink(missing_ok=True)
    return str(path)


def run_task(task: Task, algorithm: str, cfg: RunConfig = RunConfig(), keep: Pipeline | None = None) -> Record:
    """Run one (task, algorithm) pair; never raises for problems in the task itself.

    ``keep``, when given, receives the pipeline artifacts and the verdict.
    """
    engine, direction = VARIANTS.get(algorithm, (algorithm, cfg.direction))
    if engine not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    max_k = task.max_k or cfg.max_k
    timeout = task.timeout_s or cfg.timeout_s
    p = keep if keep is not None else Pipeline()
    rec = Record(task.name, algorithm, "UNKNOWN", 0, 0.0, 0.0, expected=task.expected)

    wall0, cpu0, child0 = time.monotonic(), time.process_time(), _children_cpu()

    def finish() -> Record:
        rec.wall_ms = round((time.monotonic() - wall0) * 1000, 1)
        rec.cpu_ms = round((time.process_time() - cpu0 + _children_cpu() - child0) * 1000, 1)
        rec.classification = classify(rec.status, rec.expected, rec.reason)
        return rec

    try:
        built = build_system(task.source())
    except NoErrorLocation:
        rec.status, rec.certificate_status, rec.reason = "TRUE", "vacuous", "no error location"
        return finish()
    except MiniCError as exc:
        rec.reason = f"parse-error: {exc}"
        return finish()
    except UnsupportedShape as exc:
        rec.reason = f"unsupported-shape: {exc}"
        return finish()
    except OSError as exc:
        rec.reason = f"io-error: {exc}"
        return finish()
    p.program, p.cfa, p.single, p.system = built.program, built.cfa, built.single, built.system

    client = SolverClient(cfg.solver_config(), _transcript_path(cfg, task, algorithm))
    client.deadline = wall0 + timeout
    try:
        try:
            v = run_engine(p.system, engine, max_k, client, direction)
        except Exception as exc:  # a runner must survive any single task
            log.exception("engine crashed on %s", task.name)
            rec.reason = f"engine-error: {type(exc).__name__}: {exc}"
            return finish()
        p.verdict = v
        rec.status, rec.k_reached, rec.reason = v.status.value, v.k_reached, v.reason
        if v.status is Status.UNKNOWN and time.monotonic() >= client.deadline:
            rec.reason = f"timeout after {timeout:g} s ({v.reason})"
        if v.status is Status.FALSE:
            rec.counterexample_depth = v.counterexample.depth
            if cfg.check_results:
                r = replay_counterexample(p.single, p.system.loop_head, p.system.state_vars, v.counterexample)
                rec.replay = "ok" if r.ok else f"failed: {r.reason}"
        elif v.status is Status.TRUE and v.certificate is not None:
            if cfg.check_results:
                client.deadline = None
                rec.certificate_status = check_certificate(p.system, v.certificate, client).status
            else:
                rec.certificate_status = "unchecked"
        rec.contract_violations = client.stats.violations
    finally:
        client.close()
    return finish()


def run_path(path, algorithm: str, cfg: RunConfig) -> Record:
    """Load and run; a broken task file becomes an inconclusive record."""
    try:
        task = load_task(path)
    except TaskError as exc:
        return Record(Path(path).name, algorithm, "UNKNOWN", 0, 0.0, 0.0, reason=f"task-error: {exc}")
    return run_task(task, algorithm, cfg)


@dataclass
class RunReport:
    records: list = field(default_factory=list)

    @property
    def counts(self) -> dict:
        out = {c: 0 for c in CLASSES}
        for r in self.records:
            out[r.classification] += 1
        return out

    @property
    def wrong(self) -> int:
        c = self.counts
        return c["wrong-proof"] + c["wrong-alarm"]


def run_corpus(paths, algorithms, cfg: RunConfig = RunConfig(), jobs: int = 1) -> RunReport:
    """Run every (task, algorithm) pair; with ``jobs`` > 1 in separate processes."""
    pairs = [(str(p), a) for p in paths for a in algorithms]
    if jobs <= 1:
        records = [run_path(p, a, cfg) for p, a in pairs]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(pairs) or 1)) as ex:
            records = list(ex.map(run_path, *zip(*pairs), [cfg] * len(pairs))) if pairs else []
    return RunReport(records)

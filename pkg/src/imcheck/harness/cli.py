"""Command-line interface: ``verify`` for one file, ``bench`` for a corpus."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import shlex
import sys
from pathlib import Path

from ..solver import DEFAULT_CMD
from ..transform import system_to_smtlib
from .report import summary, write_report
from .runner import ALGORITHMS, VARIANTS, Pipeline, RunConfig, run_corpus, run_task
from .tasks import TaskError, discover, load_task

EXIT_TRUE, EXIT_FALSE, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--max-k", type=_positive_int, default=None, help="largest BMC bound (default 10, or the task's MAX-K)")
    p.add_argument("--timeout-s", type=_positive_float, default=60.0, help="wall-clock limit per run (default 60)")
    p.add_argument("--solver-cmd", default=None, help="interpolating solver command (default: bundled server)")
    p.add_argument("--itp-dialect", choices=("a", "b"), default="a", help="interpolation command dialect")
    p.add_argument(
        "--backward-itp",
        nargs="?",
        const="on",
        default="on",
        choices=("on", "off"),
        help="compute interpolants backward (default) or, with =off, forward",
    )
    p.add_argument("--query-timeout-ms", type=_positive_int, default=30000, help="per-query solver timeout")
    p.add_argument("--no-validate-itp", action="store_true", help="skip interpolant contract checks")
    p.add_argument("--debug-smt", nargs="?", const="smt-logs", default=None, metavar="DIR", help="write solver transcripts")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="imcheck", description="Interpolation-based model checking for MiniC programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="verify one MiniC file")
    v.add_argument("file")
    v.add_argument("--algorithm", choices=ALGORITHMS, default="imc")
    v.add_argument("--dump-system", action="store_true", help="print INIT/TRANS/ERROR as SMT-LIB and continue")

    b = sub.add_parser("bench", parents=[common], help="run a directory of tasks and write reports")
    b.add_argument("dir")
    b.add_argument(
        "--algorithms",
        nargs="+",
        choices=ALGORITHMS + tuple(VARIANTS),
        default=list(ALGORITHMS),
        metavar="ALG",
        help=f"any of {', '.join(ALGORITHMS + tuple(VARIANTS))}",
    )
    b.add_argument("--jobs", type=_positive_int, default=1, help="parallel worker processes")
    b.add_argument("--out", default="results", help="output directory")
    b.add_argument("--no-plots", action="store_true")
    return p


def config_from(args) -> RunConfig:
    cmd = tuple(shlex.split(args.solver_cmd)) if args.solver_cmd else DEFAULT_CMD
    return RunConfig(
        max_k=args.max_k or RunConfig.max_k,
        timeout_s=args.timeout_s,
        solver_cmd=cmd,
        dialect=args.itp_dialect,
        query_timeout_ms=args.query_timeout_ms,
        validate_itp=not args.no_validate_itp,
        direction="backward" if args.backward_itp == "on" else "forward",
        debug_smt=args.debug_smt,
    )


def _verify(args, cfg: RunConfig) -> int:
    try:
        task = load_task(args.file)
    except TaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.max_k is not None:
        # an explicit bound wins over the file's annotation
        task = dataclasses.replace(task, max_k=args.max_k)
    p = Pipeline()
    rec = run_task(task, args.algorithm, cfg, keep=p)
    if args.dump_system and p.system is not None:
        print(system_to_smtlib(p.system), end="")
    if p.system is None and rec.status != "TRUE":
        print(f"error: {rec.reason}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{rec.status}  algorithm={rec.algorithm} k={rec.k_reached} cpu={rec.cpu_ms:.0f}ms wall={rec.wall_ms:.0f}ms")
    if rec.certificate_status:
        print(f"certificate: {rec.certificate_status}")
    if rec.counterexample_depth is not None:
        print(f"counterexample depth: {rec.counterexample_depth} (replay {rec.replay or 'skipped'})")
        v = p.verdict
        for i in range(len(v.counterexample.head_maps)):
            state = v.counterexample.head_state(i, p.system.state_vars)
            print(f"  loop head {i}: " + ", ".join(f"{k}={state[k]}" for k in sorted(state)))
    if rec.reason:
        print(f"reason: {rec.reason}")
    return {"TRUE": EXIT_TRUE, "FALSE": EXIT_FALSE}.get(rec.status, EXIT_UNKNOWN)


def _bench(args, cfg: RunConfig) -> int:
    try:
        tasks = discover(args.dir)
    except TaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not tasks:
        print(f"error: no .mc tasks in {args.dir}", file=sys.stderr)
        return EXIT_USAGE
    report = run_corpus([t.path for t in tasks], args.algorithms, cfg, jobs=args.jobs)
    files = write_report(report, args.out, plots=not args.no_plots)
    for r in report.records:
        print(f"{r.task:28} {r.algorithm:13} {r.status:8} k={r.k_reached:<3} {r.classification}")
    print(summary(report))
    print(f"wrote {', '.join(str(Path(f).name) for f in files.values())} to {args.out}")
    return 0 if report.wrong == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "verify":
        return _verify(args, cfg)
    return _bench(args, cfg)


if __name__ == "__main__":
    sys.exit(main())

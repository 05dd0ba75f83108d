"""SMT-LIB 2 client for an interpolating solver running as a subprocess."""

from __future__ import annotations

import logging
import os
import selectors
import subprocess
import sys
import time
from dataclasses import dataclass
from enum import Enum

from ..formula import conj, declarations, eq, free_vars, neg, to_smtlib
from ..formula.sexpr import SExprError, Symbol, dumps, is_complete, parse_one
from ..formula.smtlib import UnsupportedInterpolant, from_sexpr, parse_var
from ..formula.terms import IntConst

log = logging.getLogger(__name__)

DEFAULT_CMD = (sys.executable, "-m", "imcheck.solver.itp_server")
DIALECTS = ("a", "b")


class SolverError(Exception):
    """Anything that turns a query into UNKNOWN upstream."""


class SolverCrash(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


class NotUnsat(SolverError):
    pass


class InterpolationUnsupported(SolverError):
    pass


class ContractViolation(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    cmd: tuple = DEFAULT_CMD
    dialect: str = "a"
    timeout_ms: int = 30000
    validate_interpolants: bool = True

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if self.dialect not in DIALECTS:
            raise ValueError(f"unknown interpolation dialect {self.dialect!r}")


class Status(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class SatResult:
    status: Status
    model: dict | None = None

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status is Status.UNSAT


@dataclass
class Stats:
    checks: int = 0
    interpolants: int = 0
    validated: int = 0
    violations: int = 0
    respawns: int = 0
    smt_ms: float = 0.0


class SolverClient:
    """Owns one solver subprocess. Not thread-safe.

    Each logical query runs inside its own push/pop frame. After a crash or
    timeout the process is killed and a fresh one is started before the
    next query.
    """

    def __init__(self, cfg: SolverConfig | None = None, transcript_path: str | None = None):
        self.cfg = cfg or SolverConfig()
        self.proc: subprocess.Popen | None = None
        self.stats = Stats()
        self.deadline: float | None = None
        self._buf = b""
        self._log = open(transcript_path, "a", encoding="utf-8") if transcript_path else None
        self._stderr = None

    # process management

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def start(self) -> None:
        self.kill()
        self._buf = b""
        try:
            self.proc = subprocess.Popen(
                list(self.cfg.cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise SolverCrash(f"cannot start solver {self.cfg.cmd!r}: {exc}") from None
        self._send("(set-option :print-success true)", expect_success=True)
        self._send("(set-option :produce-models true)", expect_success=False)
        # solvers that do not know an option answer "unsupported"; that is fine
        self._send("(set-option :produce-interpolants true)", expect_success=False)
        self._send("(set-logic ALL)", expect_success=False)

    def kill(self) -> None:
        if self.proc is not None:
            try:
                self.proc.kill()
                self.proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                pass
            for s in (self.proc.stdin, self.proc.stdout):
                try:
                    s.close()
                except OSError:
                    pass
            self.proc = None

    def close(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            try:
                self.proc.stdin.write(b"(exit)\n")
                self.proc.stdin.flush()
                self.proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                pass
        self.kill()
        if self._log:
            self._log.close()
            self._log = None

    def _ensure(self) -> None:
        if self.proc is None or self.proc.poll() is not None:
            if self.proc is not None:
                self.stats.respawns += 1
            self.start()

    # wire protocol

    def _budget(self) -> float:
        budget = self.cfg.timeout_ms / 1000.0
        if self.deadline is not None:
            budget = min(budget, self.deadline - time.monotonic())
        return budget

    def _send(self, text: str, expect_success: bool = False) -> str:
        """Send one command and return the raw response text."""
        if self._log:
            self._log.write(f"> {text}\n")
        try:
            self.proc.stdin.write(text.encode() + b"\n")
            self.proc.stdin.flush()
        except OSError as exc:
            self.kill()
            raise SolverCrash(f"solver pipe closed: {exc}") from None
        resp = self._read(self._budget())
        if self._log:
            self._log.write(f"< {resp}\n")
            self._log.flush()
        if expect_success and resp != "success":
            self.kill()
            raise SolverCrash(f"expected success, got {resp!r}")
        return resp

    def _read(self, budget: float) -> str:
        end = time.monotonic() + max(budget, 0.0)
        fd = self.proc.stdout.fileno()
        with selectors.DefaultSelector() as sel:
            sel.register(fd, selectors.EVENT_READ)
            while True:
                text = self._buf.decode(errors="replace")
                if text.strip() and is_complete(text):
                    self._buf = b""
                    return text.strip()
                left = end - time.monotonic()
                if left <= 0 or not sel.select(left):
                    self.kill()
                    raise SolverTimeout(f"no solver response within {budget:.1f}s")
                chunk = os.read(fd, 65536)
                if not chunk:
                    self.kill()
                    raise SolverCrash("solver exited unexpectedly")
                self._buf += chunk

    def _command(self, text: str) -> str:
        resp = self._send(text)
        if resp.startswith("(error"):
            raise SolverCrash(f"solver error on {text[:80]!r}: {resp}")
        return resp

    def _frame(self, *formulas) -> None:
        self._command("(push 1)")
        vs = set()
        for f in formulas:
            vs |= free_vars(f)
        for d in declarations(vs).replace(")(", ")\n(").splitlines():
            self._command(d)

    def _pop(self) -> None:
        try:
            self._command("(pop 1)")
        except SolverError:
            self.kill()

    # queries

    def check_sat(self, f, model: bool = True) -> SatResult:
        self._ensure()
        t0 = time.monotonic()
        self.stats.checks += 1
        try:
            self._frame(f)
            self._command(f"(assert {to_smtlib(f)})")
            resp = self._command("(check-sat)")
            if resp not in ("sat", "unsat", "unknown"):
                self.kill()
                raise SolverCrash(f"unexpected check-sat response {resp!r}")
            status = Status(resp)
            values = None
            if status is Status.SAT and model:
                values = self._values(sorted(free_vars(f), key=lambda v: (v.name, v.index)))
            self._pop()
            return SatResult(status, values)
        finally:
            self.stats.smt_ms += (time.monotonic() - t0) * 1000

    def _values(self, vs: list) -> dict:
        if not vs:
            return {}
        resp = self._command("(get-value (" + " ".join(str(v) for v in vs) + "))")
        try:
            pairs = parse_one(resp)
            out = {}
            for name, val in pairs:
                out[parse_var(name.name if isinstance(name, Symbol) else dumps(name))] = _int_value(val)
        except (SExprError, ValueError, TypeError, UnsupportedInterpolant) as exc:
            self.kill()
            raise SolverCrash(f"cannot read model {resp!r}: {exc}") from None
        return out

    def is_unsat(self, f) -> bool:
        r = self.check_sat(f, model=False)
        if r.status is Status.UNKNOWN:
            raise SolverTimeout("solver answered unknown")
        return r.is_unsat

    def is_valid(self, f) -> bool:
        return self.is_unsat(neg(f))

    def get_interpolant(self, a, b, direction: str = "backward"):
        """Craig interpolant C for unsat a ∧ b; backward computes ¬itp(b, a)."""
        if direction == "forward":
            c = self._raw_interpolant(a, b)
        elif direction == "backward":
            c = neg(self._raw_interpolant(b, a))
        else:
            raise ValueError(f"unknown direction {direction!r}")
        self.stats.interpolants += 1
        if self.cfg.validate_interpolants:
            self.validate(a, b, c)
        return c

    def validate(self, a, b, c) -> None:
        shared = free_vars(a) & free_vars(b)
        problems = []
        extra = free_vars(c) - shared
        if extra:
            problems.append(f"non-shared variables {sorted(map(str, extra))}")
        if not self.is_unsat(conj(a, neg(c))):
            problems.append("a does not imply the interpolant")
        if not self.is_unsat(conj(c, b)):
            problems.append("interpolant is consistent with b")
        self.stats.validated += 1
        if problems:
            self.stats.violations += 1
            raise ContractViolation("; ".join(problems))

    def _raw_interpolant(self, a, b):
        self._ensure()
        t0 = time.monotonic()
        try:
            self._frame(a, b)
            if self.cfg.dialect == "a":
                self._command(f"(assert {to_smtlib(a)})")
                self._command("(push 1)")
                self._command(f"(assert {to_smtlib(b)})")
                status = self._command("(check-sat)")
                self._command("(pop 1)")
                self._require_unsat(status)
                resp = self._send(f"(get-interpolant __itp {to_smtlib(neg(b))})")
                term = self._interpolant_from(resp, define=True)
            else:
                self._command(f"(assert (! {to_smtlib(a)} :named __ga))")
                self._command(f"(assert (! {to_smtlib(b)} :named __gb))")
                status = self._command("(check-sat)")
                self._require_unsat(status)
                resp = self._send("(get-interpolants __ga __gb)")
                term = self._interpolant_from(resp, define=False)
            self._pop()
            return term
        except SolverError:
            self.kill()
            raise
        finally:
            self.stats.smt_ms += (time.monotonic() - t0) * 1000

    def _require_unsat(self, status: str) -> None:
        if status == "sat":
            raise NotUnsat("interpolation partitions are jointly satisfiable")
        if status != "unsat":
            raise SolverTimeout(f"check-sat before interpolation answered {status!r}")

    def _interpolant_from(self, resp: str, define: bool):
        if resp == "unsupported" or (resp.startswith("(error") and "interpol" in resp):
            raise InterpolationUnsupported(resp)
        if resp.startswith("(error"):
            raise SolverCrash(resp)
        try:
            e = parse_one(resp)
            if define:
                if not (isinstance(e, list) and len(e) == 5 and e[0] == Symbol("define-fun")):
                    raise UnsupportedInterpolant(f"unexpected response {resp!r}")
                body = e[4]
            else:
                if not (isinstance(e, list) and len(e) == 1):
                    raise UnsupportedInterpolant(f"unexpected response {resp!r}")
                body = e[0]
            return from_sexpr(body)
        except (SExprError, UnsupportedInterpolant) as exc:
            raise InterpolationUnsupported(f"cannot read interpolant: {exc}") from None

    def enumerate_models(self, f, project: list, limit: int = 10000) -> set:
        """All assignments to ``project`` that extend to a model of ``f``."""
        self._ensure()
        out = set()
        self._frame(f, *project)
        try:
            self._command(f"(assert {to_smtlib(f)})")
            while len(out) < limit:
                resp = self._command("(check-sat)")
                if resp == "unsat":
                    break
                if resp != "sat":
                    raise SolverTimeout(f"model enumeration answered {resp!r}")
                if not project:
                    out.add(())
                    break
                vals = self._values(list(project))
                row = tuple(vals[v] for v in project)
                out.add(row)
                block = neg(conj(*(eq(v, IntConst(x)) for v, x in zip(project, row))))
                self._command(f"(assert {to_smtlib(block)})")
        finally:
            self._pop()
        return out


def _int_value(val) -> int:
    if isinstance(val, int):
        return val
    if isinstance(val, list) and len(val) == 2 and val[0] == Symbol("-") and isinstance(val[1], int):
        return -val[1]
    if isinstance(val, Symbol) and val.name in ("true", "false"):
        raise ValueError("boolean model values are not expected")
    raise ValueError(f"not an integer literal: {dumps(val)}")


"""A small interpolating SMT-LIB 2 server on top of the z3 Python API.

Run as ``python3 -m imcheck.solver.itp_server``. It understands the subset
of SMT-LIB used by the client, plus both interpolation dialects:

* ``(get-interpolant I B)``: an interpolant between the current assertions
  and ``(not B)``, answered as ``(define-fun I () Bool ...)``;
* ``(get-interpolants g1 g2 ...)`` over ``:named`` assertions, answered as
  a parenthesized list.

z3 has no interpolation engine, so interpolants are built by
generalization: we collect candidate facts over the shared variables that
the A side implies (bounds, octagon differences, congruences, and atoms of
projections computed by quantifier elimination), keep those that jointly
refute B, and shrink the set greedily. Exact projections serve as fallback.
"""

from __future__ import annotations

import itertools
import sys

import z3

from ..formula.sexpr import Keyword, SExprError, String, Symbol, dumps, is_complete, parse_all, parse_one
from ..formula.smtlib import UnsupportedInterpolant, from_sexpr

_OCTAGON_LIMIT = 6
_CASE_LIMIT = 4
_CUBE_LIMIT = 8
_CUBE_RANK = 4
_POINT_RANK = 1
_REL_RANK = 2.5
_BOUND_RANK = 2
_REL_EQ_RANK = 2.5


class CommandError(Exception):
    pass


# z3 helpers


def _walk(e: z3.ExprRef):
    seen = set()
    stack = [e]
    while stack:
        t = stack.pop()
        if t.get_id() in seen:
            continue
        seen.add(t.get_id())
        yield t
        if z3.is_quantifier(t):
            stack.append(t.body())
        else:
            stack.extend(t.children())


def free_consts(e: z3.ExprRef) -> set:
    return {t for t in _walk(e) if z3.is_const(t) and t.decl().kind() == z3.Z3_OP_UNINTERPRETED}


def _has_quantifier(e: z3.ExprRef) -> bool:
    return any(z3.is_quantifier(t) for t in _walk(e))


def moduli(e: z3.ExprRef) -> set:
    out = set()
    for t in _walk(e):
        if z3.is_app_of(t, z3.Z3_OP_MOD) or z3.is_app_of(t, z3.Z3_OP_IDIV):
            d = t.arg(1)
            if z3.is_int_value(d) and d.as_long() > 1:
                out.add(d.as_long())
    return out


class _Purifier:
    """Replace ``t mod c`` / ``t div c`` by fresh q, r with t = c*q + r, 0 <= r < c."""

    def __init__(self):
        self.side: list = []
        self.fresh: list = []
        self.cache: dict = {}
        self.count = itertools.count()

    def __call__(self, e: z3.ExprRef) -> z3.ExprRef:
        key = e.get_id()
        if key in self.cache:
            return self.cache[key]
        if z3.is_app(e) and e.num_args() > 0:
            kids = [self(c) for c in e.children()]
            if (z3.is_app_of(e, z3.Z3_OP_MOD) or z3.is_app_of(e, z3.Z3_OP_IDIV)) and z3.is_int_value(e.arg(1)):
                c = e.arg(1).as_long()
                n = next(self.count)
                q, r = z3.Int(f"__q{n}"), z3.Int(f"__r{n}")
                self.fresh += [q, r]
                self.side += [kids[0] == c * q + r, r >= 0, r < c]
                out = r if z3.is_app_of(e, z3.Z3_OP_MOD) else q
            else:
                out = e.decl()(*kids)
        else:
            out = e
        self.cache[key] = out
        return out


def project(f: z3.ExprRef, keep: set, timeout_ms: int = 5000, tactics=("qe2", "qe")):
    """Quantifier-free equivalent of (exists vars(f) - keep. f), or None."""
    p = _Purifier()
    body = z3.And(p(f), *p.side)
    local = [v for v in free_consts(body) if v not in keep]
    if not local:
        return f
    # qe2 (model-based projection) is much faster on disjunctive bodies;
    # classic qe is the fallback
    for name in tactics:
        goal = z3.Goal()
        goal.add(z3.Exists(local, body))
        try:
            out = z3.TryFor(z3.Then(name, "simplify"), timeout_ms)(goal).as_expr()
        except z3.Z3Exception:
            continue
        if not _has_quantifier(out) and free_consts(out) <= keep:
            return out
    return None


def _conjuncts(e: z3.ExprRef) -> list:
    if z3.is_and(e):
        out = []
        for c in e.children():
            out.extend(_conjuncts(c))
        return out
    if z3.is_true(e):
        return []
    return [e]


def _negated_conjuncts(e: z3.ExprRef) -> list:
    """Conjuncts of (not e), pushing the negation through a top-level or."""
    if z3.is_or(e):
        out = []
        for c in e.children():
            out.extend(_negated_conjuncts(c))
        return out
    if z3.is_false(e):
        return []
    return [z3.simplify(z3.Not(e))]


def _dnf(e: z3.ExprRef, limit: int):
    """Cubes (lists of formulas) whose disjunction is e, or None past ``limit``."""
    if z3.is_or(e):
        out = []
        for c in e.children():
            sub = _dnf(c, limit)
            if sub is None or len(out) + len(sub) > limit:
                return None
            out.extend(sub)
        return out
    if z3.is_and(e):
        out = [[]]
        for c in e.children():
            sub = _dnf(c, limit)
            if sub is None or len(out) * len(sub) > limit:
                return None
            out = [x + y for x in out for y in sub]
        return out
    return [[e]]


def _is_literal(e: z3.ExprRef) -> bool:
    if z3.is_not(e):
        e = e.arg(0)
    return not (z3.is_and(e) or z3.is_or(e) or z3.is_not(e) or z3.is_implies(e))


def _readable(e: z3.ExprRef) -> bool:
    """Whether the client's linear-arithmetic reader accepts the rendering."""
    try:
        from_sexpr(parse_one(_render(e)))
    except (SExprError, UnsupportedInterpolant, ValueError):
        return False
    return True


class Interpolator:
    def __init__(self, timeout_ms: int = 10000):
        self.timeout_ms = timeout_ms

    def _solver(self, *fs) -> z3.Solver:
        s = z3.Solver()
        s.set("timeout", self.timeout_ms)
        s.add(*fs)
        return s

    def _unsat(self, *fs) -> bool:
        r = self._solver(*fs).check()
        if r == z3.unknown:
            raise CommandError("solver returned unknown during interpolation")
        return r == z3.unsat

    def interpolate(self, a: z3.ExprRef, b: z3.ExprRef) -> z3.ExprRef:
        if _has_quantifier(a) or _has_quantifier(b):
            raise CommandError("interpolation over quantified formulas is not supported")
        if self._unsat(a):
            return z3.BoolVal(False)
        if self._unsat(b):
            return z3.BoolVal(True)
        if not self._unsat(a, b):
            raise CommandError("partitions are jointly satisfiable")
        shared = free_consts(a) & free_consts(b)
        cubes = self._cubes(a, shared)
        if cubes is not None:
            parts = [self._generalize(z3.And(a, z3.And(*c)), b, shared, keep=c) for c in cubes]
            if all(p is not None for p in parts):
                return z3.Or(*parts)
        split = self._case_split(a, shared)
        if split is not None:
            var, values = split
            parts = [self._generalize(z3.And(a, var == c), b, shared, var == c) for c in values]
            if all(p is not None for p in parts):
                return z3.Or(*parts)
        itp = self._generalize(a, b, shared)
        if itp is not None:
            return itp
        exact = project(a, shared)
        if exact is not None and _readable(exact):
            return exact
        other = project(b, shared)
        if other is not None and _readable(z3.Not(other)):
            return z3.simplify(z3.Not(other))
        raise CommandError("could not compute an interpolant")

    def _generalize(self, a, b, shared, pin=None, keep=()):
        """Shrunk conjunction of candidate atoms refuting b, or None.

        ``keep`` lists preferred atoms (the literals of a cube of a's
        projection); they are dropped last.
        """
        cands = self._candidates(a, b, shared)
        seen = {c.sexpr() for _, c in cands}
        for lit in keep:
            lit = z3.simplify(lit)
            if _is_literal(lit) and lit.sexpr() not in seen:
                cands.append((_CUBE_RANK, lit))
        if pin is not None:
            b = z3.And(b, pin)
            if self._unsat(b):
                return pin
        if not cands or not self._unsat(b, *[c for _, c in cands]):
            return None
        itp = self._shrink(b, cands)
        if pin is not None:
            itp = z3.And(pin, itp)
        return itp if _readable(itp) else None

    def _cubes(self, a, shared):
        """The projection of a as 2.._CUBE_LIMIT satisfiable disjuncts, if it splits so.

        Classic qe tends to answer in disjunctive form, qe2 in conjunctive form.
        """
        for tactic in ("qe", "qe2"):
            proj = project(a, shared, timeout_ms=2000, tactics=(tactic,))
            if proj is None:
                continue
            dnf = _dnf(proj, 4 * _CUBE_LIMIT)
            if dnf is None:
                continue
            cubes = [cube for cube in dnf if not self._unsat(a, *cube)]
            if 2 <= len(cubes) <= _CUBE_LIMIT:
                return cubes
        return None

    def _case_split(self, a, shared):
        """A shared integer taking 2.._CASE_LIMIT values under a, with those values.

        Invariants of programs with a dispatch variable are often disjunctive
        over its values; generalizing each case separately keeps them apart.
        """
        s = self._solver(a)
        best = None
        for v in sorted((v for v in shared if v.sort() == z3.IntSort()), key=str):
            values = []
            s.push()
            while len(values) <= _CASE_LIMIT and s.check() == z3.sat:
                val = s.model().eval(v, model_completion=True)
                values.append(val.as_long())
                s.add(v != val)
            s.pop()
            if 2 <= len(values) <= _CASE_LIMIT and (best is None or len(values) > len(best[1])):
                best = (v, sorted(values))
        return best

    def _candidates(self, a, b, shared) -> list:
        """(rank, atom) pairs over shared variables, each implied by a.

        Lower rank means dropped earlier during shrinking.
        """
        s = self._solver(a)
        out: list = []
        seen: set = set()

        def implied(atom) -> bool:
            s.push()
            s.add(z3.Not(atom))
            r = s.check()
            s.pop()
            return r == z3.unsat

        def add(rank, atom):
            atom = z3.simplify(atom)
            if z3.is_true(atom) or atom.sexpr() in seen:
                return
            if implied(atom):
                seen.add(atom.sexpr())
                out.append((rank, atom))

        ints = sorted((v for v in shared if v.sort() == z3.IntSort()), key=str)
        bools = sorted((v for v in shared if v.sort() == z3.BoolSort()), key=str)
        mods = sorted(moduli(a) | moduli(b))
        if s.check() != z3.sat:
            return []
        model = s.model()
        for v in bools:
            val = model.eval(v, model_completion=True)
            add(0, v == val)
        for v in ints:
            val = model.eval(v, model_completion=True).as_long()
            for m in sorted(mods, reverse=True):
                # larger moduli are dropped before smaller ones
                add(5 + 1.0 / m, v % m == val % m)
                if m > 2:
                    for r in range(m):
                        if r != val % m:
                            add(5 + 1.0 / m, v % m != r)
        # (term, rank of an equality, rank of a one-sided bound); a relational
        # equality such as x - y = 0 outlives the variable bounds, a relational
        # inequality does not
        terms = [(v, _POINT_RANK, _BOUND_RANK) for v in ints]
        if len(ints) <= _OCTAGON_LIMIT:
            for v, w in itertools.combinations(ints, 2):
                terms += [(v - w, _REL_EQ_RANK, _REL_RANK), (v + w, _REL_EQ_RANK, _REL_RANK)]
        for t, eq_rank, rank in terms:
            lo, hi = self._bounds(a, t)
            if lo is not None and lo == hi:
                add(eq_rank, t == lo)
            if hi is not None:
                add(rank, t <= hi)
            if lo is not None:
                add(rank, t >= lo)
        proj = project(a, shared)
        if proj is not None:
            for atom in _conjuncts(proj):
                if _is_literal(atom):
                    add(3, atom)
        proj_b = project(b, shared)
        if proj_b is not None:
            for atom in _negated_conjuncts(proj_b):
                if _is_literal(atom):
                    add(0.5, atom)
        return out

    def _bounds(self, a, t):
        lo = hi = None
        for sense in ("max", "min"):
            o = z3.Optimize()
            o.set("timeout", min(self.timeout_ms, 2000))
            o.add(a)
            h = o.maximize(t) if sense == "max" else o.minimize(t)
            if o.check() != z3.sat:
                continue
            val = (o.upper(h) if sense == "max" else o.lower(h))
            if z3.is_int_value(val):
                if sense == "max":
                    hi = val.as_long()
                else:
                    lo = val.as_long()
        return lo, hi

    def _shrink(self, b, cands) -> z3.ExprRef:
        s = self._solver(b)
        lits = {}
        for i, (rank, atom) in enumerate(cands):
            p = z3.Bool(f"__keep{i}")
            lits[i] = p
            s.add(z3.Implies(p, atom))
        # no unsat-core shortcut: a core may pick a narrow atom (x mod 4 = 3)
        # over a more general one (x mod 2 = 1) that the greedy order prefers
        keep = set(range(len(cands)))
        for i in sorted(keep, key=lambda i: (cands[i][0], i)):
            trial = keep - {i}
            if s.check(*[lits[j] for j in trial]) == z3.unsat:
                keep = trial
        atoms = [cands[i][1] for i in sorted(keep)]
        if not atoms:
            return z3.BoolVal(True)
        return z3.And(*atoms) if len(atoms) != 1 else atoms[0]


# the SMT-LIB front end


def _int_text(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def _render(e: z3.ExprRef) -> str:
    if z3.is_int_value(e):
        return _int_text(e.as_long())
    if z3.is_true(e):
        return "true"
    if z3.is_false(e):
        return "false"
    return e.sexpr().replace("\n", " ")


class Server:
    def __init__(self, out=sys.stdout):
        self.out = out
        self.interp = Interpolator()
        self.reset()

    def reset(self) -> None:
        self.print_success = False
        self.decls: list[list[str]] = [[]]
        self.assertions: list[list[tuple]] = [[]]
        self.last = None
        self.timeout_ms = 0

    # plumbing

    def emit(self, text: str) -> None:
        self.out.write(text + "\n")
        self.out.flush()

    def ok(self) -> None:
        if self.print_success:
            self.emit("success")

    def decl_text(self) -> str:
        return "".join(d for frame in self.decls for d in frame)

    def term(self, sexpr) -> z3.ExprRef:
        text = self.decl_text() + f"(assert {dumps(sexpr)})"
        try:
            vec = z3.parse_smt2_string(text)
        except z3.Z3Exception as exc:
            raise CommandError(f"cannot parse term: {exc}") from None
        return vec[0]

    def all_assertions(self) -> list:
        return [(n, f) for frame in self.assertions for n, f in frame]

    def new_solver(self) -> z3.Solver:
        s = z3.Solver()
        if self.timeout_ms:
            s.set("timeout", self.timeout_ms)
        return s

    # command loop

    def serve(self, stream) -> None:
        buf = ""
        for line in stream:
            buf += line
            if not is_complete(buf):
                continue
            try:
                cmds = parse_all(buf)
            except SExprError as exc:
                self.emit(f'(error "{exc}")')
                buf = ""
                continue
            buf = ""
            for cmd in cmds:
                if self.execute(cmd) is False:
                    return

    def execute(self, cmd) -> bool:
        try:
            if not isinstance(cmd, list) or not cmd or not isinstance(cmd[0], Symbol):
                raise CommandError(f"malformed command {dumps(cmd)}")
            name = cmd[0].name
            handler = getattr(self, "cmd_" + name.replace("-", "_"), None)
            if handler is None:
                self.emit("unsupported")
                return True
            return handler(cmd[1:]) is not False
        except CommandError as exc:
            msg = str(exc).replace('"', "'")
            self.emit(f'(error "{msg}")')
        except z3.Z3Exception as exc:
            msg = str(exc).replace('"', "'")
            self.emit(f'(error "z3: {msg}")')
        return True

    def cmd_exit(self, args):
        self.ok()
        return False

    def cmd_set_option(self, args):
        if len(args) >= 2 and isinstance(args[0], Keyword):
            key, val = args[0].name, args[1]
            if key == "print-success":
                self.print_success = val == Symbol("true")
            elif key == "timeout" and isinstance(val, int):
                self.timeout_ms = val
                self.interp.timeout_ms = val or 10000
        self.ok()

    def cmd_set_logic(self, args):
        self.ok()

    def cmd_set_info(self, args):
        self.ok()

    def cmd_echo(self, args):
        self.emit(str(args[0]) if args and isinstance(args[0], String) else '""')

    def cmd_reset(self, args):
        self.reset()
        self.ok()

    def cmd_reset_assertions(self, args):
        self.decls = [[]]
        self.assertions = [[]]
        self.last = None
        self.ok()

    def cmd_declare_fun(self, args):
        if len(args) != 3 or args[1] != []:
            raise CommandError("only constants can be declared")
        self.decls[-1].append(f"(declare-fun {dumps(args[0])} () {dumps(args[2])})")
        self.ok()

    def cmd_declare_const(self, args):
        self.decls[-1].append(f"(declare-fun {dumps(args[0])} () {dumps(args[1])})")
        self.ok()

    def cmd_push(self, args):
        for _ in range(args[0] if args else 1):
            self.decls.append([])
            self.assertions.append([])
        self.ok()

    def cmd_pop(self, args):
        n = args[0] if args else 1
        if n >= len(self.assertions):
            raise CommandError("pop below the base level")
        for _ in range(n):
            self.decls.pop()
            self.assertions.pop()
        self.last = None
        self.ok()

    def cmd_assert(self, args):
        t = args[0]
        name = None
        if isinstance(t, list) and t and t[0] == Symbol("!"):
            for k, v in zip(t[2::2], t[3::2]):
                if k == Keyword("named"):
                    name = v.name
            t = t[1]
        self.assertions[-1].append((name, self.term(t)))
        self.last = None
        self.ok()

    def cmd_check_sat(self, args):
        s = self.new_solver()
        s.add(*[f for _, f in self.all_assertions()])
        r = s.check()
        self.last = s if r == z3.sat else None
        self.emit(str(r))

    def cmd_get_value(self, args):
        if self.last is None:
            raise CommandError("no model available")
        m = self.last.model()
        parts = []
        for t in args[0]:
            # wrap in a trivial equality so integer terms parse as assertions
            val = m.eval(self.term([Symbol("="), t, t]).arg(0), model_completion=True)
            parts.append(f"({dumps(t)} {_render(val)})")
        self.emit("(" + " ".join(parts) + ")")

    def cmd_get_interpolant(self, args):
        if len(args) != 2:
            raise CommandError("usage: (get-interpolant <name> <term>)")
        a = z3.And(*[f for _, f in self.all_assertions()])
        b = z3.Not(self.term(args[1]))
        itp = self.interp.interpolate(a, b)
        self.emit(f"(define-fun {dumps(args[0])} () Bool {_render(itp)})")

    def cmd_get_interpolants(self, args):
        named = {n: f for n, f in self.all_assertions() if n is not None}
        parts = []
        for g in args:
            names = [x.name for x in g[1:]] if isinstance(g, list) else [g.name]
            try:
                parts.append(z3.And(*[named[n] for n in names]))
            except KeyError as exc:
                raise CommandError(f"unknown partition {exc}") from None
        if len(parts) < 2:
            raise CommandError("need at least two partitions")
        out = []
        for i in range(1, len(parts)):
            out.append(_render(self.interp.interpolate(z3.And(*parts[:i]), z3.And(*parts[i:]))))
        self.emit("(" + " ".join(out) + ")")


def main() -> None:
    Server().serve(sys.stdin)


if __name__ == "__main__":
    main()

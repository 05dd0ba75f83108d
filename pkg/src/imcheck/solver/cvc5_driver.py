"""Stdin/stdout SMT-LIB front end for the cvc5 Python bindings.

Some installations ship cvc5 only as a Python wheel. This wrapper lets the
client talk to it like a regular solver binary speaking the
``get-interpolant`` dialect::

    imcheck verify f.mc --solver-cmd "python3 -m imcheck.solver.cvc5_driver" --itp-dialect a
"""

from __future__ import annotations

import sys

from ..formula.sexpr import SExprError, is_complete, parse_all, dumps


def main() -> None:
    try:
        import cvc5
    except ImportError:
        sys.stdout.write('(error "cvc5 Python bindings are not installed")\n')
        sys.stdout.flush()
        sys.exit(1)
    tm = cvc5.TermManager()
    solver = cvc5.Solver(tm)
    solver.setOption("incremental", "true")
    solver.setOption("produce-interpolants", "true")
    solver.setOption("interpolants-mode", "default")
    parser = cvc5.InputParser(solver)
    parser.setIncrementalStringInput(cvc5.InputLanguage.SMT_LIB_2_6, "stdin")
    symbols = parser.getSymbolManager()
    buf = ""
    for line in sys.stdin:
        buf += line
        if not is_complete(buf):
            continue
        try:
            cmds = parse_all(buf)
        except SExprError as exc:
            sys.stdout.write(f'(error "{exc}")\n')
            sys.stdout.flush()
            buf = ""
            continue
        buf = ""
        for cmd in cmds:
            text = dumps(cmd)
            if text.startswith("(set-logic"):
                # cvc5 rejects a second set-logic and the client always sends one
                text = "(set-logic ALL)"
            parser.appendIncrementalStringInput(text + "\n")
            try:
                c = parser.nextCommand()
                out = c.invoke(solver, symbols) if not c.isNull() else ""
            except RuntimeError as exc:
                msg = str(exc).replace('"', "'").replace("\n", " ")
                out = f'(error "{msg}")\n'
            sys.stdout.write(out if out.endswith("\n") or not out else out + "\n")
            sys.stdout.flush()
            if text.startswith("(exit"):
                return


if __name__ == "__main__":
    main()

"""Verdict records shared by all engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..formula import SsaMap, Var, exists, free_vars, rename

INTERNAL = "__k_"


class Status(str, Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Certificate:
    """A candidate inductive invariant at the loop head.

    ``formula`` is over the state variables at ``state_map`` plus internal
    variables, which are read existentially. Internals carry a ``__k_``
    prefix so they can never be captured by another generation's names.
    """

    formula: object
    state_map: SsaMap
    state_vars: tuple

    @classmethod
    def make(cls, formula, state_map, state_vars) -> "Certificate":
        gen = {Var(v, state_map[v]) for v in state_vars}
        f = rename(formula, lambda v: v if v in gen else Var(INTERNAL + v.name, v.index))
        return cls(f, SsaMap({v: state_map[v] for v in state_vars}), tuple(state_vars))

    def internals(self) -> set:
        return {v for v in free_vars(self.formula) if v.name.startswith(INTERNAL)}

    def at(self, target) -> object:
        """The certificate as a closed predicate over ``target``'s generation."""
        inner = self.internals()
        body = rename(self.formula, lambda v: v if v in inner else Var(v.name, target[v.name]))
        return exists(inner, body)


@dataclass
class Counterexample:
    """A satisfying model of the BMC query at bound depth + 1.

    ``head_maps[i]`` is the SSA map of the i-th loop-head visit, so the
    concrete state there is read off the model through it.
    """

    depth: int
    model: dict
    head_maps: list = field(default_factory=list)

    def head_state(self, i: int, variables) -> dict:
        m = self.head_maps[i]
        return {v: self.model[Var(v, m[v])] for v in variables if Var(v, m[v]) in self.model}


@dataclass
class Verdict:
    status: Status
    k_reached: int
    algorithm: str = ""
    certificate: Certificate | None = None
    counterexample: Counterexample | None = None
    reason: str = ""
    queries: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    def __post_init__(self):
        if self.status is Status.FALSE and self.counterexample is None:
            raise ValueError("FALSE verdicts carry a counterexample")

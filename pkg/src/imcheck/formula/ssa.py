"""SSA index maps, formula templates, instantiation and index shifting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .terms import BoolConst, Formula, Var, free_vars, rename


class IndexCollision(RuntimeError):
    pass


class UnboundVariable(ValueError):
    pass


class SsaMap(Mapping[str, int]):
    """Immutable map from program variable to its current SSA index."""

    __slots__ = ("_d",)

    def __init__(self, items: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        self._d = dict(items)
        for name, idx in self._d.items():
            if idx < 0:
                raise ValueError(f"negative SSA index for {name}")

    def __getitem__(self, key: str) -> int:
        return self._d[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __hash__(self) -> int:
        return hash(frozenset(self._d.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, Mapping):
            return self._d == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}↦{v}" for k, v in sorted(self._d.items()))
        return f"SsaMap({{{inner}}})"

    def var(self, name: str) -> Var:
        return Var(name, self._d[name])

    def vars(self, names: Iterable[str] | None = None) -> list[Var]:
        names = sorted(self._d) if names is None else names
        return [Var(n, self._d[n]) for n in names]

    def updated(self, **changes: int) -> "SsaMap":
        d = dict(self._d)
        d.update(changes)
        return SsaMap(d)

    def with_(self, name: str, idx: int) -> "SsaMap":
        d = dict(self._d)
        d[name] = idx
        return SsaMap(d)

    @classmethod
    def zero(cls, names: Iterable[str]) -> "SsaMap":
        return cls({n: 0 for n in names})


@dataclass
class IndexPool:
    """Run-wide monotone supply of fresh SSA indices.

    Index 0 of every variable is the initial generation and is never
    handed out by :meth:`fresh`.
    """

    _next: dict = field(default_factory=dict)
    issued: set = field(default_factory=set)

    def fresh(self, name: str) -> int:
        idx = self._next.get(name, 1)
        self._next[name] = idx + 1
        v = Var(name, idx)
        if v in self.issued:
            raise IndexCollision(f"index {v} issued twice")
        self.issued.add(v)
        return idx

    def reserve(self, v: Var) -> None:
        """Mark an externally chosen index as used."""
        self.issued.add(v)
        if v.index >= self._next.get(v.name, 1):
            self._next[v.name] = v.index + 1


@dataclass(frozen=True)
class FormulaTemplate:
    body: Formula
    in_map: SsaMap
    out_map: SsaMap

    @property
    def is_false(self) -> bool:
        return isinstance(self.body, BoolConst) and not self.body.value


def instantiate(template: FormulaTemplate, base: Mapping[str, int], pool: IndexPool) -> tuple[Formula, SsaMap]:
    """Rebase ``template`` so that its entry generation is ``base``.

    Every non-entry index in the body is replaced by a fresh index from
    ``pool``; the returned map is the exit generation.
    """
    if template.is_false:
        return template.body, SsaMap(base)
    fresh: dict[Var, Var] = {}

    def rebase(v: Var) -> Var:
        entry = template.in_map.get(v.name, 0)
        if v.index == entry:
            if v.name not in base:
                raise UnboundVariable(f"no base index for {v.name}")
            return Var(v.name, base[v.name])
        if v not in fresh:
            fresh[v] = Var(v.name, pool.fresh(v.name))
        return fresh[v]

    body = rename(template.body, rebase)
    out = dict(base)
    for name, idx in template.out_map.items():
        if idx == template.in_map.get(name, 0):
            if name in base:
                out[name] = base[name]
            continue
        v = Var(name, idx)
        if v not in fresh:
            fresh[v] = Var(name, pool.fresh(name))
        out[name] = fresh[v].index
    return body, SsaMap(out)


def shift_variable_index(f: Formula, target: Mapping[str, int], source: Mapping[str, int]) -> Formula:
    """Rename every ``(v, source[v])`` occurrence to ``(v, target[v])``."""

    def move(v: Var) -> Var:
        if v.name not in source or source[v.name] != v.index:
            raise UnboundVariable(f"{v} is not at the source generation")
        if v.name not in target:
            raise UnboundVariable(f"no target index for {v.name}")
        return Var(v.name, target[v.name])

    return rename(f, move)


def generation_vars(f: Formula, m: Mapping[str, int]) -> set:
    return {v for v in free_vars(f) if m.get(v.name) == v.index}

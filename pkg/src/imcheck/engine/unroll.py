"""Unrolling the summarized system into BMC queries."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..formula import FALSE, TRUE, IndexPool, SsaMap, conj, disj, instantiate
from ..transform.lbe import SummarizedSystem


@dataclass
class Query:
    """One partitioned BMC query at bound k.

    ``prefix`` is INIT, ``loop`` the first TRANS copy (true when k = 1) and
    ``suffix`` the remaining TRANS copies plus ERROR. ``maps[i]`` is the
    state generation at the i-th loop-head visit (maps[0] after INIT).
    """

    k: int
    prefix: object
    loop: object
    suffix: object
    pre_error: object
    maps: list
    trans_instances: int
    loops: list = field(default_factory=list)
    error: object = TRUE

    @property
    def formula(self):
        main = conj(self.prefix, self.loop, self.suffix)
        return disj(main, self.pre_error)


class Unroller:
    """Instantiates templates against one run-wide index pool."""

    def __init__(self, sys: SummarizedSystem, pool: IndexPool | None = None):
        self.sys = sys
        self.pool = pool or IndexPool()

    def zero(self) -> SsaMap:
        return self.sys.zero_map()

    def init(self):
        return instantiate(self.sys.init, self.zero(), self.pool)

    def trans(self, base):
        return instantiate(self.sys.trans, base, self.pool)

    def error(self, base):
        f, _ = instantiate(self.sys.error, base, self.pool)
        return f

    def pre_error(self):
        if self.sys.pre_error is None:
            return FALSE
        f, _ = instantiate(self.sys.pre_error, self.zero(), self.pool)
        return f

    def query(self, k: int) -> Query:
        """INIT ∧ TRANS^(k-1) ∧ ERROR, plus the pre-loop error paths at k = 1."""
        if k < 1:
            raise ValueError("bounds start at 1")
        prefix, m = self.init()
        maps = [m]
        loops = []
        for _ in range(k - 1):
            t, m = self.trans(m)
            loops.append(t)
            maps.append(m)
        err = self.error(m)
        loop = loops[0] if loops else TRUE
        suffix = conj(*loops[1:], err)
        pre = self.pre_error() if k == 1 else FALSE
        return Query(k, prefix, loop, suffix, pre, maps, len(loops), loops, err)

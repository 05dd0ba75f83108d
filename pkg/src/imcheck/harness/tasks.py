"""Verification tasks: a MiniC file plus its header annotations."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

EXPECTED = ("safe", "unsafe", "unknown")
_HEADER = re.compile(r"^\s*//\s*([A-Z-]+)\s*:\s*(\S+)\s*$")


class TaskError(Exception):
    pass


@dataclass(frozen=True)
class Task:
    path: Path
    expected: str = "unknown"
    max_k: int | None = None
    timeout_s: float | None = None

    @property
    def name(self) -> str:
        return self.path.name

    def source(self) -> str:
        return self.path.read_text(encoding="utf-8")


def parse_header(text: str) -> dict:
    """Read ``// KEY: value`` lines from the leading comment block."""
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        m = _HEADER.match(line)
        if m is None:
            if line.lstrip().startswith("//"):
                continue
            break
        out[m.group(1)] = m.group(2)
    return out


def load_task(path) -> Task:
    path = Path(path)
    try:
        header = parse_header(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise TaskError(f"cannot read {path}: {exc}") from None
    expected = header.get("VERDICT", "unknown").lower()
    if expected not in EXPECTED:
        raise TaskError(f"{path.name}: unknown verdict annotation {expected!r}")
    try:
        max_k = int(header["MAX-K"]) if "MAX-K" in header else None
        timeout = float(header["TIMEOUT-S"]) if "TIMEOUT-S" in header else None
    except ValueError as exc:
        raise TaskError(f"{path.name}: bad annotation: {exc}") from None
    return Task(path, expected, max_k, timeout)


def discover(directory) -> list[Task]:
    """All ``*.mc`` tasks directly inside ``directory``, sorted by name."""
    d = Path(directory)
    if not d.is_dir():
        raise TaskError(f"not a directory: {d}")
    return [load_task(p) for p in sorted(d.glob("*.mc"))]

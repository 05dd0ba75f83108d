from pathlib import Path

import pytest

from imcheck.harness.runner import build_system
from imcheck.solver import SolverClient, SolverConfig

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

EVEN = """
int x;
x = 0;
while (nondet()) {
  x = x + 2;
}
if (x % 2 != 0) {
  ERROR: return;
}
"""


@pytest.fixture
def client():
    c = SolverClient(SolverConfig(timeout_ms=20000))
    yield c
    c.close()


@pytest.fixture(scope="module")
def shared_client():
    c = SolverClient(SolverConfig(timeout_ms=20000))
    yield c
    c.close()


def system_of(source: str):
    return build_system(source).system

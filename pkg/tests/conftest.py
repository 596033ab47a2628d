import sys

import pytest

from sqcrn import corpus
from sqcrn.crn import parse_crn


@pytest.fixture
def degradation():
    return corpus.model("degradation")


@pytest.fixture
def degradation_partition(degradation):
    return corpus.config("degradation").partition(degradation)


@pytest.fixture
def branching():
    return corpus.branching_ctmc()


def death_crn(n0: int, k: float = 1e-4):
    return parse_crn(f"species L\ninit L={n0}\nr d: L -> 0 @ {k!r}\n")


def birth_death_crn(kb: float, kd: float, n0: int):
    return parse_crn(f"species X\ninit X={n0}\nr b: X -> 2 X @ {kb!r}\nr d: X -> 0 @ {kd!r}\n")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.line(k))

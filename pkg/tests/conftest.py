from __future__ import annotations

import pytest

from varietylab.model import SystemSnapshot
from varietylab.regulator import OutcomeTable, modular_table

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion exercised by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _criteria.get(number, (title, "PASS"))[1]
        status = "PASS" if rep.outcome == "passed" and prev == "PASS" else "FAIL"
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"{status}  {number:>2}. {title}")


@pytest.fixture
def latin2() -> OutcomeTable:
    return OutcomeTable.build(["d1", "d2"], ["r1", "r2"], [["a", "b"], ["b", "a"]])


@pytest.fixture
def modular8x4() -> OutcomeTable:
    return modular_table(8, 4, modulus=8)


def snap(t: int, inputs=(), outputs=(), system: str = "S") -> SystemSnapshot:
    return SystemSnapshot(system, t, frozenset(inputs), frozenset(outputs))

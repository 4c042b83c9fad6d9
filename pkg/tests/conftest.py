import re

import pytest

_CRITERIA: dict[int, tuple[str, str]] = {}
_CRIT_RE = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _CRIT_RE.search(report.nodeid)
    if not m:
        return
    num, name = int(m.group(1)), m.group(2).replace("_", " ")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[num] = (name, report.outcome.upper())


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        name, outcome = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {name:42s} {outcome}")


@pytest.fixture
def gas():
    from rarefan.gas import GasModel
    return GasModel()


@pytest.fixture
def canonical_fan(gas):
    from rarefan.background import connect_right_state
    from rarefan.gas import PrimitiveState
    return connect_right_state(gas, PrimitiveState(1.0, (0.0,)), -0.5)

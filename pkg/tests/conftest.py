import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from algothermo import build_automaton, enumerate_cores  # noqa: E402
from algothermo.machine import Universe  # noqa: E402

_criteria: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def universe():
    return Universe(4)


@pytest.fixture(scope="session")
def table(universe):
    return enumerate_cores(universe, "011", 19)


@pytest.fixture(scope="session")
def aut():
    return build_automaton("011")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    cid, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.passed else "FAIL"
        prev = _criteria.get(item.nodeid)
        if prev is None or prev[1] == "PASS":
            _criteria[item.nodeid] = (f"{cid}: {title}", status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in sorted(_criteria.values(), key=lambda t: _sort_key(t[0])):
        terminalreporter.write_line(f"[{status}] {label}")


def _sort_key(label: str):
    head = label.split(":", 1)[0]
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 0, head)

"""Shared fixtures plus the acceptance-criteria summary.

Tests marked ``@pytest.mark.acceptance("<criterion>")`` are tallied and a
one-line PASS/FAIL verdict per criterion is printed at the end of the run,
so the acceptance status is readable without scanning individual tests.
"""

import numpy as np
import pytest

from tritest import ContingencyTable

_node_criterion = {}
_criterion_order = []
_criterion_state = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is None:
            continue
        name = marker.args[0]
        _node_criterion[item.nodeid] = name
        if name not in _criterion_order:
            _criterion_order.append(name)


def pytest_runtest_logreport(report):
    name = _node_criterion.get(report.nodeid)
    if name is None:
        return
    state = _criterion_state.setdefault(name, "PASS")
    if report.failed:
        _criterion_state[name] = "FAIL"
    elif report.skipped and state == "PASS":
        _criterion_state[name] = "SKIP"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_state:
        return
    terminalreporter.section("acceptance criteria")
    for name in _criterion_order:
        state = _criterion_state.get(name, "FAIL")
        terminalreporter.write_line(f"{state}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


@pytest.fixture
def strong_treatment_table():
    """900/920 treated successes, bounds [0.9, 0.98]: region 0 for c <= 0.9."""
    return ContingencyTable(np.array([[50, 30], [20, 900]]))

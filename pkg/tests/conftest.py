import re

import numpy as np
import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes: dict[int, bool] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        ok = report.outcome == "passed"
        _outcomes[k] = _outcomes.get(k, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {k}: {'PASS' if _outcomes[k] else 'FAIL'}")

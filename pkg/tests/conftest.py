"""Shared fixtures and the acceptance summary printed after the run."""

import numpy as np
import pytest

from releq.universal import QuadraticModel

ACCEPTANCE = {}


@pytest.fixture
def model321():
    return QuadraticModel(3.0, 2.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = ACCEPTANCE.setdefault(number, {"title": title, "ok": None})
    if rep.failed:
        entry["ok"] = False
    elif rep.when == "call" and entry["ok"] is None:
        entry["ok"] = rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion test")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        e = ACCEPTANCE[number]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {e['title']}")

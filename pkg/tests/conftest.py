"""Shared fixtures and the acceptance summary printed after the run."""
from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS: dict[str, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by a test")
    config.addinivalue_line("markers", "slow: long-running statistical suite")


@pytest.fixture
def record(request):
    """Attach a one-line detail string to the current criterion test."""
    def _record(text: str):
        request.node.user_properties.append(("detail", text))
    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.skipped):
        return
    label = str(marker.args[0])
    details = [v for k, v in item.user_properties if k == "detail"]
    if rep.passed and not hasattr(rep, "wasxfail"):
        status = "PASS"
    elif hasattr(rep, "wasxfail"):
        status = "FAIL (expected, see decisions ledger)"
    elif rep.skipped:
        status = "SKIP"
    else:
        status = "FAIL"
    _RESULTS.setdefault(label, []).append((status, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: (len(s.split()[0]), s)):
        for status, detail in _RESULTS[label]:
            line = f"criterion {label}: {status}"
            if detail:
                line += f"  [{detail}]"
            terminalreporter.write_line(line)

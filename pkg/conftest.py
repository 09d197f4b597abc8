"""Shared pytest hooks: surface one pass/fail line per acceptance criterion."""

import pytest

_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call":
        _results.append((marker.args[0], rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in _results:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}")

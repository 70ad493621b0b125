"""Collects one pass/fail line per acceptance criterion and prints them at the end of the run."""

import pytest

_LINES: dict[str, str] = {}


@pytest.fixture
def criterion(request):
    def record(label: str, ok: bool, detail: str):
        _LINES[request.node.nodeid] = f"{label:<5} {'PASS' if ok else 'FAIL'}  {detail}"
        assert ok, detail
    return record


def pytest_runtest_logreport(report):
    # a criterion that errored before reaching its verdict still gets a line
    if report.when == "call" and report.failed and "test_acceptance" in report.nodeid:
        _LINES.setdefault(report.nodeid, f"{report.nodeid.rsplit('::', 1)[-1]:<5} FAIL  error before verdict")


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        # test names carry zero-padded criterion numbers, so node ids sort in order
        for _, line in sorted(_LINES.items()):
            terminalreporter.write_line(line)

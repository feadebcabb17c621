import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _results[number] = (title, report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, passed, duration = _results[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {title} ({duration:.2f}s)")

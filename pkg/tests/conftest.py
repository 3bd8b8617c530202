import math

import pytest

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    mark = getattr(report, "criterion", None)
    if mark is None:
        return
    number, title = mark
    prev = _criteria.get(number, (title, "PASS"))[1]
    status = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
    _criteria[number] = (title, status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}")


def within(value, target, stderr, z=4.0):
    """True if ``value`` lies within ``z`` standard errors of ``target``."""
    return abs(value - target) <= z * stderr + 1e-12


def binom_se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)

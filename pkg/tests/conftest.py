import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

GAU_WU = np.array([
    [0, 1, 0, -2],
    [0, 0, 2, 1j],
    [0, 0, 0, 1],
    [0, 0, 0, 0],
])
J4 = np.diag(np.ones(3), 1).astype(complex)
SQUARE = np.diag([1, 1j, -1, -1j])

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def complex_matrices(n=4):
    return st.tuples(
        arrays(np.float64, (n, n), elements=finite),
        arrays(np.float64, (n, n), elements=finite),
    ).map(lambda p: p[0] + 1j * p[1])


def strict_upper(n=4):
    return complex_matrices(n).map(lambda a: np.triu(a, 1))


def random_strict_upper(rng, n=4):
    return np.triu(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Acceptance criteria report: tests marked ``criterion(n, title)`` get one
# summary line each, whatever the capture mode.

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        prev = _CRITERIA.get(number, (title, True))
        _CRITERIA[number] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")


def angle_gap(a, b):
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def axis_gap(a, b):
    """Distance between two undirected line angles (period pi)."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)

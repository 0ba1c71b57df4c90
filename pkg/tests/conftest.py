from __future__ import annotations

import pytest

from toolplan.benchmark import fixture_file, load_benchmark_task, load_sim_config, resolve_fixture_root
from toolplan.llm import ReplayBackend

_CRITERIA: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    if report.when == "setup" and report.passed:
        return
    _CRITERIA[number] = (title, report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def golden_root():
    return resolve_fixture_root("golden")


@pytest.fixture(scope="session")
def golden(golden_root):
    """Backend factory that replays the shipped golden transcript for (task, method)."""
    def factory(task: str, method: str, seed: int) -> ReplayBackend:
        return ReplayBackend.from_file(fixture_file(golden_root, task, method))
    return factory


@pytest.fixture(scope="session")
def sim_config():
    return load_sim_config()


@pytest.fixture
def task():
    return load_benchmark_task

from pathlib import Path

import pytest
from hypothesis import settings

from patfolio.taxonomy import load_basemap

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.passed else "FAIL"
        if number not in _criteria or status == "FAIL":
            _criteria[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def toy_map():
    return load_basemap(FIXTURES / "toy_ipc4.tsv", FIXTURES / "toy_ipc4_layout.tsv")


@pytest.fixture
def toy_map3():
    return load_basemap(FIXTURES / "toy_ipc3.tsv", FIXTURES / "toy_ipc3_layout.tsv")

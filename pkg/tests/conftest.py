import math

import pytest

from deformed_atom.params import AtomModel, magnesium_preset

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def mg():
    return magnesium_preset()


@pytest.fixture(scope="session")
def mg_fixed():
    """Magnesium with the nucleus mass sent to infinity."""
    return magnesium_preset().with_infinite_nucleus()


@pytest.fixture(scope="session")
def helium_like():
    return AtomModel(Z=2, k=1.0, m_c=1.0, m_n=math.inf)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number = marker.args[0]
    title = marker.kwargs.get("title", item.name)
    failed = report.failed or (report.when == "setup" and report.skipped)
    if report.when == "call" or failed:
        prev = _ACCEPTANCE.get(number, (title, "PASS"))[1]
        _ACCEPTANCE[number] = (title, "FAIL" if failed or prev == "FAIL" else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")

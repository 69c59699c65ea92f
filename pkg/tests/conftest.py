import pytest

from helpers import FIXTURE_CSV

# Acceptance outcomes, filled by tests/test_acceptance.py and printed at the end.
ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def fixture_csv():
    return FIXTURE_CSV


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number = marker.args[0]
    if call.when == "setup" and call.excinfo is not None and call.excinfo.errisinstance(pytest.skip.Exception):
        ACCEPTANCE_RESULTS[number] = ("SKIP", str(call.excinfo.value))
    elif call.when == "call":
        if call.excinfo is None:
            ACCEPTANCE_RESULTS.setdefault(number, ("PASS", item.name))
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            ACCEPTANCE_RESULTS[number] = ("SKIP", str(call.excinfo.value))
        else:
            ACCEPTANCE_RESULTS[number] = ("FAIL", f"{item.name}: {call.excinfo.typename}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {status}  ({detail})")

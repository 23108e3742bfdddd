import pytest

from cfhdual import make_entry

ACCEPTANCE_LINES = []


def record(criterion, ok, detail=""):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pseudo():
    return make_entry("pseudosphere-cylinder")


@pytest.fixture(scope="session")
def inverted():
    return make_entry("inverted-pseudosphere")


@pytest.fixture(scope="session")
def cusp():
    return make_entry("cusp-pseudosphere")

import numpy as np
import pytest

from kurograph import freqdist

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def normal_model():
    return freqdist.standard_normal()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

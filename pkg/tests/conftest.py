import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qschur", max_examples=40, deadline=None)
settings.load_profile("qschur")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

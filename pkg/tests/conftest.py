import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# the worked example used throughout
EXAMPLE_F = "x^2*y^2 + 2*x*y^2 + x*y + 2*x"


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from dynmpi.grid import make_grid
from dynmpi.system import build_system_pair, to_frequency


@pytest.fixture(scope="session")
def grid3():
    return make_grid()


@pytest.fixture(scope="session")
def pair3(grid3):
    return build_system_pair(grid3)


@pytest.fixture(scope="session")
def grid19():
    return make_grid(19, 19, 1, n_samples=1632)


@pytest.fixture(scope="session")
def pair19(grid19):
    return build_system_pair(grid19)


@pytest.fixture(scope="session")
def pair19_freq(pair19):
    return to_frequency(pair19)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])

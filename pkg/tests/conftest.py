import numpy as np
import pytest

from scriholo.discretization import UGrid, make_sphere_grid


@pytest.fixture(scope="session")
def small_sphere():
    return make_sphere_grid(8, 16)


@pytest.fixture(scope="session")
def coarse_sphere():
    return make_sphere_grid(4, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def wide_ugrid():
    return UGrid(-12.0, 12.0, 1024)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS.values():
            terminalreporter.write_line(line)

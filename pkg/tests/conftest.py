import numpy as np
import pytest

from chronos.lattice import gaussian_state, momentum_grid, positive_momentum_grid


@pytest.fixture(scope="session")
def grid():
    return momentum_grid(512, 0.02)


@pytest.fixture(scope="session")
def kg_grid():
    return positive_momentum_grid(512, 0.01)


@pytest.fixture(scope="session")
def packet(grid):
    """The standard test packet: m = 1, p0 = 2, sigma_p = 0.05, x0 = -10."""
    return gaussian_state(grid, 2.0, 0.05, -10.0)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

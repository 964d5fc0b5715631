import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from landau.grid import DistributionField, PhaseGrid

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def two_bumps(grid: PhaseGrid, width: float = 0.6, centers=((-1.0, 0.0, 0.0), (1.0, 0.0, 0.0))):
    v = grid.velocity.v
    f = sum(np.exp(-np.sum((v - np.array(c)) ** 2, axis=-1) / (2 * width ** 2)) for c in centers)
    return DistributionField(grid, np.broadcast_to(f, grid.shape).copy())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

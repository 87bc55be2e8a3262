import numpy as np
import pytest

from wlab.grid import DiagonalField
from wlab.wstructure import AxisW, WSpec


def random_w(rng, d, max_jumps=2):
    axes = []
    for _ in range(d):
        n = rng.integers(0, max_jumps + 1)
        locs = rng.uniform(0, 1, n)
        axes.append(AxisW(rng.uniform(0.3, 3.0), tuple(zip(locs, rng.uniform(0.05, 2.0, n)))))
    return WSpec(tuple(axes))


def random_field(rng, N, d, theta=3.0):
    return DiagonalField(rng.uniform(1 / theta, theta, (d,) + (N,) * d), theta=theta)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def membrane_w():
    return WSpec.with_jumps([[(0.5, 0.5)]])


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

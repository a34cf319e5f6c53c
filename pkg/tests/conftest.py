import math

import numpy as np
import pytest

from chaos_lab.kernels import ChaosCoefficients

A = 1.0 / math.sqrt(12.0)


@pytest.fixture
def complete23():
    return ChaosCoefficients.from_entries({2: [((1, 2), A), ((1, 3), A), ((2, 3), A)]})


@pytest.fixture
def pair():
    return ChaosCoefficients.from_entries({2: [((1, 2), 1.0)]})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from activeview.reward import Basis, RewardModel

S1_THETA = np.array([-0.0714, 0.0842, 0.0329, 0.0914, 0.2443, 0.0275])
S1_START = np.array([-2.0175, -0.6555, 2.1213])
S1_TARGET = np.array([1.9635, 1.4266, 1.7634])


@pytest.fixture
def s1_model():
    return RewardModel(Basis.REDUCED6, S1_THETA)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)

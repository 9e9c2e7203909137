import sys

import numpy as np
import pytest

from levyput import fleet
from levyput.models import JumpComponent, LevyModel, PhaseType
from levyput.montecarlo import SimConfig

FLEET = tuple(fleet.MODELS)


@pytest.fixture
def bm():
    """sigma^2 = 2, no drift: psi(l) = l^2, Phi(1) = 1."""
    return LevyModel(2.0, 0.0)


@pytest.fixture
def bv_up():
    """drift 1 with Exp(1) down jumps at rate 1: psi(l) = l^2 / (1 + l)."""
    return LevyModel(0.0, 1.0, down=JumpComponent(1.0, PhaseType.exponential(1.0)))


@pytest.fixture
def bm_exp():
    """sigma^2 = 2 with Exp(1) down jumps at rate 1."""
    return LevyModel(2.0, 0.0, down=JumpComponent(1.0, PhaseType.exponential(1.0)))


@pytest.fixture
def mc():
    return SimConfig(n_paths=100_000, seed=12345)


@pytest.fixture
def mc_small():
    return SimConfig(n_paths=20_000, seed=777)


def grid_for(s, n=50):
    return np.linspace(s.x_star - 1.0, s.x_star + 3.0, n)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)

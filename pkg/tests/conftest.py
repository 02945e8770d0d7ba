import numpy as np
import pytest

from jtcsim import analysis
from jtcsim.jtc import JTCScenario

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def scenario():
    return JTCScenario.default()


@pytest.fixture(scope="session")
def profile(scenario):
    return analysis.impedance_profile(scenario, 1.0)


@pytest.fixture(scope="session")
def wheel_sweep(scenario):
    return analysis.sweep_wheel_resistance(scenario)


@pytest.fixture(scope="session")
def ballast_sweep(scenario):
    return analysis.sweep_ballast(scenario)


@pytest.fixture(scope="session")
def rail_sweep(scenario):
    return analysis.sweep_rail_impedance(scenario)


@pytest.fixture(scope="session")
def importance(scenario):
    return analysis.structural_importance(scenario, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s.split("criterion", 1)[1]):
            terminalreporter.write_line(line)

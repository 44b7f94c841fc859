import numpy as np
import pytest

from homoclinic_gate import build_frame, powerlaw, powerlaw_homoclinic, speed_modulated
from homoclinic_gate.homoclinic import find_equilibrium, saddle_data, shoot_homoclinic
from homoclinic_gate.systems import linearly_transformed


@pytest.fixture(scope="session")
def orbit():
    return powerlaw_homoclinic(1.0, 1.0, 2)


@pytest.fixture(scope="session")
def a1_system():
    return powerlaw(1.0, 1.0, 2, "A1")


@pytest.fixture(scope="session")
def cos_system():
    return powerlaw(1.0, 1.0, 2, "cos")


@pytest.fixture(scope="session")
def a1_frame(a1_system, orbit):
    return build_frame(a1_system, orbit, T=30.0)


@pytest.fixture(scope="session")
def a1_frame15(a1_system, orbit):
    return build_frame(a1_system, orbit, T=15.0)


@pytest.fixture(scope="session")
def cos_frame(cos_system, orbit):
    return build_frame(cos_system, orbit, T=20.0)


def _shot_frame(system, T=30.0):
    eq = find_equilibrium(system, [0.0, 0.0])
    orb = shoot_homoclinic(system, saddle_data(system, eq))
    return build_frame(system, orb, T=T)


@pytest.fixture(scope="session")
def modulated_frame():
    return _shot_frame(speed_modulated(powerlaw(1.0, 1.0, 2, "cos"), 0.0, 0.5))


@pytest.fixture(scope="session")
def transformed_frame():
    M = np.array([[1.0, 0.3], [0.2, 1.0]])
    return _shot_frame(linearly_transformed(powerlaw(1.0, 1.0, 2, "sin"), M))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qcollide import SystemSpec, ensemble_map, thermal_ensemble

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])
FIG4_V = np.array(
    [
        [0, 1, 0, 1, 0],
        [1, 0, 1, 0, 1],
        [0, 1, 0, 1, 0],
        [1, 0, 1, 0, 1],
        [0, 1, 0, 1, 0],
    ],
    dtype=float,
)

_ACCEPTANCE = []


def two_level_spec():
    return SystemSpec([0.0, 1.0], SIGMA_X + SIGMA_Z)


def five_level_spec():
    return SystemSpec(np.arange(1, 6, dtype=float) ** 2, FIG4_V, mass=0.5)


def broad_two_level_spec():
    return SystemSpec([2.0, 2.5], SIGMA_X + SIGMA_Z, mass=0.5)


@pytest.fixture
def qubit_spec():
    return two_level_spec()


@pytest.fixture
def ladder_spec():
    return five_level_spec()


@pytest.fixture
def pair_spec():
    return broad_two_level_spec()


@pytest.fixture(scope="session")
def ladder_effusion_map():
    spec = five_level_spec()
    return ensemble_map(spec, thermal_ensemble("effusion", 3.0, spec))


@pytest.fixture(scope="session")
def ladder_mb_map():
    spec = five_level_spec()
    return ensemble_map(spec, thermal_ensemble("maxwell_boltzmann", 3.0, spec))


@pytest.fixture(scope="session")
def pair_ensemble_map():
    spec = broad_two_level_spec()
    ens = thermal_ensemble("broad_effusion_mixture", 3.0, spec, sigma=0.31, n_nodes=65)
    return ensemble_map(spec, ens, builder="full")


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)

from pathlib import Path

import pytest

from cslbounds.csl_diffusion import CubeGeometry, CylinderGeometry
from cslbounds.environment import GasEnvironment
from cslbounds.physcore import pressure_mbar_to_pa

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def cryo_helium() -> GasEnvironment:
    """He-4 at 1 K and 5e-13 mbar."""
    return GasEnvironment.he4(1.0, pressure_mbar_to_pa(5e-13))


@pytest.fixture
def coin() -> CylinderGeometry:
    """Silica coin, R = 0.1 mm, L = 0.1 um."""
    return CylinderGeometry.from_density(1e-4, 1e-7, 2200.0)


@pytest.fixture
def lisa_cube() -> CubeGeometry:
    return CubeGeometry(0.046, 1.928)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from isac_mi import SystemDims, default_beamformer, generate_scenario


@pytest.fixture(scope="session")
def dims4():
    return SystemDims(n_t=4, n_r=4, n_u=4, num_scatter=2, m=4, n_s=4)


@pytest.fixture(scope="session")
def scenario4(dims4):
    return generate_scenario(dims4, rician_kappa=1.0, seed=11)


@pytest.fixture(scope="session")
def beamformer4(dims4):
    return default_beamformer(dims4, 4.0)


@pytest.fixture(scope="session")
def dims16():
    # headline setup: N_t = N_r = N_u = 16, L = 2, M = N_u, N_s = M
    return SystemDims(n_t=16, n_r=16, n_u=16, num_scatter=2, m=16, n_s=16)


@pytest.fixture(scope="session")
def scenario16(dims16):
    return generate_scenario(dims16, rician_kappa=1.0, seed=7)


@pytest.fixture(scope="session")
def beamformer16(dims16):
    return default_beamformer(dims16, 16.0)
